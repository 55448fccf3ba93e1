#include "zz/events.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace zz {

static constexpr double kInf = std::numeric_limits<double>::infinity();

double first_arrival(RateBound bound, double unit_exponential) {
  const double a = bound.a;
  const double b = bound.b;
  const double e = unit_exponential;
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(e))
    throw std::invalid_argument("first_arrival: non-finite input");
  if (b < 0.0) throw std::invalid_argument("first_arrival: negative slope");
  if (!(e > 0.0)) throw std::invalid_argument("first_arrival: E must be positive");

  if (b == 0.0) {
    if (a > 0.0) return e / a;
    return kInf;
  }
  if (a >= 0.0) {
    // tau = (-a + sqrt(a^2 + 2 b E)) / b, written to avoid cancellation
    return 2.0 * e / (a + std::sqrt(a * a + 2.0 * b * e));
  }
  // rate is zero until t = -a/b, then integrates to b (t + a/b)^2 / 2
  return -a / b + std::sqrt(2.0 * e / b);
}

bool clock_before(const ArrivalDraw& a, const ArrivalDraw& b) {
  if (a.tau != b.tau) return a.tau < b.tau;
  if (a.kind != b.kind) return a.kind == ClockKind::prior;
  return a.dim < b.dim;
}

const ArrivalDraw& min_clock(const std::vector<ArrivalDraw>& draws) {
  if (draws.empty()) throw std::invalid_argument("min_clock: no draws");
  const ArrivalDraw* best = &draws.front();
  for (std::size_t k = 1; k < draws.size(); ++k) {
    if (clock_before(draws[k], *best)) best = &draws[k];
  }
  if (std::isinf(best->tau))
    throw std::runtime_error("process frozen: total event rate is zero");
  return *best;
}

}  // namespace zz
