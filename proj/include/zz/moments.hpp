#pragma once

#include <span>
#include <vector>

namespace zz {

// Exact componentwise integrals of the piecewise-linear trajectory:
// m1 = int xi(s) ds and m2 = int xi(s)^2 ds over a total duration T.
// Additive over concatenated segments.
struct TrajectoryMoments {
  double duration = 0.0;
  std::vector<double> m1;
  std::vector<double> m2;

  explicit TrajectoryMoments(int p = 0)
      : m1(static_cast<std::size_t>(p), 0.0), m2(static_cast<std::size_t>(p), 0.0) {}

  int dim() const { return static_cast<int>(m1.size()); }

  std::vector<double> mean() const;      // m1 / T
  std::vector<double> variance() const;  // m2/T - mean^2, floored at 0

  TrajectoryMoments& operator+=(const TrajectoryMoments& other);
};

// Adds one linear segment starting at `xi` with velocity `v` and length
// `tau`: m1 += xi*tau + v*tau^2/2, m2 += xi^2*tau + xi*v*tau^2 + v^2*tau^3/3.
void accumulate_segment(TrajectoryMoments& moments, std::span<const double> xi,
                        std::span<const double> velocity, double tau);

}  // namespace zz
