#pragma once

#include <cstdint>
#include <vector>

namespace zz {

// Rate envelope M(t) = (a + b t)^+ for t >= 0. The slope b must be
// nonnegative; the intercept a may be negative, in which case the rate stays
// zero until t = -a/b.
struct RateBound {
  double a = 0.0;
  double b = 0.0;
};

inline double envelope_value(RateBound bound, double t) {
  const double m = bound.a + bound.b * t;
  return m > 0.0 ? m : 0.0;
}

enum class ClockKind : std::uint8_t { prior = 0, likelihood = 1 };

struct ArrivalDraw {
  double tau = 0.0;
  int dim = 0;
  ClockKind kind = ClockKind::likelihood;
  double envelope_at_tau = 0.0;  // M(tau), denominator of the later accept ratio
};

// First arrival time of a Poisson process with rate (a + b s)^+, i.e. the
// solution of  int_0^tau (a + b s)^+ ds = E  for a unit exponential E > 0.
// Returns +inf when the envelope is identically zero.
double first_arrival(RateBound bound, double unit_exponential);

// Strict ordering used for the 2p-clock superposition minimum: earlier tau
// first; ties broken by kind (prior before likelihood), then dimension index.
bool clock_before(const ArrivalDraw& a, const ArrivalDraw& b);

// Minimum clock of a superposition. Throws std::runtime_error("process
// frozen") when every tau is infinite, i.e. the total event rate is zero.
const ArrivalDraw& min_clock(const std::vector<ArrivalDraw>& draws);

}  // namespace zz
