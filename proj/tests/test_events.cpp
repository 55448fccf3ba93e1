#include <doctest.h>

#include <cmath>
#include <limits>

#include "zz/events.hpp"
#include "zz/rng.hpp"

#include "support.hpp"

using namespace zz;

TEST_SUITE_BEGIN("events");

TEST_CASE("first arrival, constant rate") {
  CHECK(first_arrival({1.0, 0.0}, 2.0) == doctest::Approx(2.0));
  CHECK(std::isinf(first_arrival({0.0, 0.0}, 1.0)));
  CHECK(std::isinf(first_arrival({-3.0, 0.0}, 1.0)));
}

TEST_CASE("first arrival, linear rate") {
  // int_0^1 s ds = 0.5
  CHECK(first_arrival({0.0, 1.0}, 0.5) == doctest::Approx(1.0));
  // zero rate until t=1, then int_1^2 (s-1) ds = 0.5
  CHECK(first_arrival({-1.0, 1.0}, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("first arrival inverts the integrated envelope") {
  // Lambda(tau) == E for random envelopes and E
  Rng rng(41);
  for (int k = 0; k < 2000; ++k) {
    const double a = 4.0 * rng.uniform() - 2.0;
    const double b = 2.0 * rng.uniform();
    const double e = rng.exponential();
    const double tau = first_arrival({a, b}, e);
    if (std::isinf(tau)) {
      CHECK(b == 0.0);
      CHECK(a <= 0.0);
      continue;
    }
    double integral;
    if (a >= 0.0) {
      integral = a * tau + 0.5 * b * tau * tau;
    } else if (b > 0.0) {
      const double t0 = -a / b;
      integral = tau <= t0 ? 0.0 : 0.5 * b * (tau - t0) * (tau - t0);
    } else {
      integral = a * tau;
    }
    CHECK(integral == doctest::Approx(e).epsilon(1e-10));
  }
}

TEST_CASE("first arrival rejects bad input") {
  CHECK_THROWS_AS(first_arrival({1.0, -0.5}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(first_arrival({1.0, 0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(first_arrival({1.0, 0.0}, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(
      first_arrival({std::numeric_limits<double>::quiet_NaN(), 0.0}, 1.0),
      std::invalid_argument);
}

TEST_CASE("min clock picks the smallest tau") {
  std::vector<ArrivalDraw> draws{{3.0, 0, ClockKind::likelihood, 1.0},
                                 {1.0, 1, ClockKind::likelihood, 1.0},
                                 {2.0, 2, ClockKind::likelihood, 1.0}};
  const ArrivalDraw& best = min_clock(draws);
  CHECK(best.dim == 1);
  CHECK(best.tau == 1.0);
}

TEST_CASE("min clock, single clock and tie-breaks") {
  std::vector<ArrivalDraw> single{{0.5, 3, ClockKind::prior, 1.0}};
  CHECK(min_clock(single).dim == 3);

  // equal tau: prior beats likelihood regardless of dimension
  std::vector<ArrivalDraw> tie{{1.0, 0, ClockKind::likelihood, 1.0},
                               {1.0, 2, ClockKind::prior, 1.0}};
  CHECK(min_clock(tie).kind == ClockKind::prior);

  // same kind: smaller dimension wins
  std::vector<ArrivalDraw> dims{{1.0, 4, ClockKind::prior, 1.0},
                                {1.0, 1, ClockKind::prior, 1.0}};
  CHECK(min_clock(dims).dim == 1);
}

TEST_CASE("min clock reports a frozen process") {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<ArrivalDraw> draws{{inf, 0, ClockKind::prior, 0.0},
                                 {inf, 1, ClockKind::likelihood, 0.0}};
  CHECK_THROWS_WITH_AS(min_clock(draws), "process frozen: total event rate is zero",
                       std::runtime_error);
}

TEST_CASE("arrival times have the right survival law") {
  // KS distance against exp(-int_0^t (a+bs)^+ ds) for the four pinned cases
  const std::pair<double, double> cases[] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0},
                                             {2.0, 0.5}};
  for (const auto& [a, b] : cases) {
    Rng rng(97 + static_cast<std::uint64_t>(a * 10 + b * 100));
    std::vector<double> taus;
    taus.reserve(100000);
    for (int k = 0; k < 100000; ++k)
      taus.push_back(first_arrival({a, b}, rng.exponential()));
    auto cdf = [a = a, b = b](double t) {
      double integral;
      if (a >= 0.0)
        integral = a * t + 0.5 * b * t * t;
      else if (b > 0.0) {
        const double t0 = -a / b;
        integral = t <= t0 ? 0.0 : 0.5 * b * (t - t0) * (t - t0);
      } else
        integral = 0.0;
      return 1.0 - std::exp(-integral);
    };
    CHECK(zztest::ks_distance(taus, cdf) < 0.02);
  }
}

TEST_CASE("superposition of constant clocks is exponential in the total rate") {
  const std::vector<double> rates{0.5, 1.5, 2.0, 3.0};
  const double total = 7.0;
  Rng rng(1234);
  const int draws = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < draws; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (double r : rates) best = std::min(best, first_arrival({r, 0.0}, rng.exponential()));
    sum += best;
    sum2 += best * best;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  const double se = std::sqrt(var / draws);
  CHECK(std::fabs(mean - 1.0 / total) < 2.0 * se);
}

TEST_SUITE_END();
