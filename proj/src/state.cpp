#include "zz/state.hpp"

#include <stdexcept>

namespace zz {

ZigZagState ZigZagState::make(std::vector<double> xi0, std::vector<double> theta0) {
  ZigZagState state;
  state.alpha.assign(xi0.size(), 1.0);
  state.xi = std::move(xi0);
  state.theta = std::move(theta0);
  validate_state(state);
  return state;
}

void validate_state(const ZigZagState& state) {
  const std::size_t p = state.xi.size();
  if (p == 0) throw std::invalid_argument("state: empty position");
  if (state.theta.size() != p || state.alpha.size() != p)
    throw std::invalid_argument("state: size mismatch");
  for (std::size_t i = 0; i < p; ++i) {
    if (state.theta[i] != 1.0 && state.theta[i] != -1.0)
      throw std::invalid_argument("state: theta must be a sign vector");
    if (!(state.alpha[i] > 0.0))
      throw std::invalid_argument("state: alpha must be strictly positive");
  }
}

}  // namespace zz
