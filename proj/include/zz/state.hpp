#pragma once

#include <vector>

namespace zz {

// Zig-zag process state: position xi, direction theta in {-1,+1}^p,
// per-dimension speed alpha (all ones unless preconditioning is active),
// and the continuous process clock t. The instantaneous velocity is the
// componentwise product theta * alpha.
struct ZigZagState {
  std::vector<double> xi;
  std::vector<double> theta;
  std::vector<double> alpha;
  double t = 0.0;

  int dim() const { return static_cast<int>(xi.size()); }

  static ZigZagState make(std::vector<double> xi0, std::vector<double> theta0);
};

// Throws std::invalid_argument unless theta is a sign vector, alpha strictly
// positive, and all sizes agree.
void validate_state(const ZigZagState& state);

}  // namespace zz
