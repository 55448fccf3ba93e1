#pragma once

#include <span>
#include <vector>

#include "zz/moments.hpp"
#include "zz/zigzag.hpp"

namespace zz {

// Exact closed-form trajectory integrals (no quadrature error).
TrajectoryMoments integrate_moments(const Skeleton& skeleton);

// Same, restricted to the process-time window [t0, t1].
TrajectoryMoments moments_between(const Skeleton& skeleton, double t0, double t1);

// k consecutive equal-length windows covering [t0, final time]; one replay pass.
std::vector<TrajectoryMoments> batch_moments(const Skeleton& skeleton, double t0,
                                             int k);

// xi(t_from + k*delta_t) for k = 0..floor((T - t_from)/delta_t), exact by
// segment replay. Returned per dimension: result[i][k].
std::vector<std::vector<double>> discretize(const Skeleton& skeleton, double delta_t,
                                            double t_from = 0.0);

// Integrated autocorrelation time, 1 + 2 sum_k rho_k with the sum truncated
// by the initial-positive-sequence rule (stop after the first k with
// rho_k + rho_{k+1} <= 0). Biased autocovariance estimates. Requires at
// least 100 samples; returns +inf for a constant series.
double iact(std::span<const double> series);

// rho_0..rho_max_lag (biased estimator); for ACF tables.
std::vector<double> autocorrelation(std::span<const double> series, int max_lag);

struct MixingReport {
  std::vector<double> iact_per_dim;  // in discretized samples, floored at 1
  std::vector<double> ess;           // n_samples / iact
  std::vector<double> asym_variance; // iact * sample variance, per dimension
  double mixing_time = 0.0;          // max over dimensions
  double delta_t = 0.0;
  int n_samples = 0;
};

// Mixing time of the slowest mixing component: the trajectory from t_from is
// discretized with delta_t chosen to yield at least min_samples samples, and
// the report carries the per-dimension IACTs of that sample matrix. Reported
// IACTs are floored at 1 (the raw iact() estimator is not).
MixingReport mixing_report(const Skeleton& skeleton, double t_from = 0.0,
                           int min_samples = 10000);

// Mean of elementwise ratios numerator_k / denominator_k. Throws on a zero
// denominator or length mismatch.
double efficiency_gain(std::span<const double> numerators,
                       std::span<const double> denominators);

}  // namespace zz
