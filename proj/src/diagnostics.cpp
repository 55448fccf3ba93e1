#include "zz/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zz {

static constexpr double kInf = std::numeric_limits<double>::infinity();

TrajectoryMoments integrate_moments(const Skeleton& skeleton) {
  TrajectoryMoments m(skeleton.initial.dim());
  replay(skeleton, [&](double t0, double t1, std::span<const double> xi,
                       std::span<const double> v) {
    accumulate_segment(m, xi, v, t1 - t0);
  });
  return m;
}

TrajectoryMoments moments_between(const Skeleton& skeleton, double t0, double t1) {
  const int p = skeleton.initial.dim();
  TrajectoryMoments m(p);
  std::vector<double> start(static_cast<std::size_t>(p));
  replay(skeleton, [&](double a, double b, std::span<const double> xi,
                       std::span<const double> v) {
    const double lo = std::max(a, t0);
    const double hi = std::min(b, t1);
    if (hi <= lo) return;
    for (std::size_t i = 0; i < start.size(); ++i) start[i] = xi[i] + v[i] * (lo - a);
    accumulate_segment(m, start, v, hi - lo);
  });
  return m;
}

std::vector<TrajectoryMoments> batch_moments(const Skeleton& skeleton, double t0,
                                             int k) {
  if (k < 1) throw std::invalid_argument("batch_moments: need k >= 1");
  const double end = skeleton.final_state.t;
  if (!(end > t0)) throw std::invalid_argument("batch_moments: empty window");
  const double width = (end - t0) / static_cast<double>(k);
  const int p = skeleton.initial.dim();
  std::vector<TrajectoryMoments> out(static_cast<std::size_t>(k), TrajectoryMoments(p));
  std::vector<double> start(static_cast<std::size_t>(p));
  replay(skeleton, [&](double a, double b, std::span<const double> xi,
                       std::span<const double> v) {
    if (b <= t0) return;
    int w = static_cast<int>(std::floor((std::max(a, t0) - t0) / width));
    w = std::clamp(w, 0, k - 1);
    for (; w < k; ++w) {
      const double lo = std::max(a, t0 + width * w);
      const double hi = std::min(b, w + 1 == k ? end : t0 + width * (w + 1));
      if (hi <= lo) {
        if (t0 + width * w >= b) break;
        continue;
      }
      for (std::size_t i = 0; i < start.size(); ++i) start[i] = xi[i] + v[i] * (lo - a);
      accumulate_segment(out[static_cast<std::size_t>(w)], start, v, hi - lo);
    }
  });
  return out;
}

std::vector<std::vector<double>> discretize(const Skeleton& skeleton, double delta_t,
                                            double t_from) {
  if (!(delta_t > 0.0)) throw std::invalid_argument("discretize: delta_t must be positive");
  const double t_end = skeleton.final_state.t;
  if (t_from < skeleton.initial.t)
    throw std::invalid_argument("discretize: t_from before trajectory start");
  const double span = std::max(t_end - t_from, 0.0);
  const std::size_t n_samples = static_cast<std::size_t>(std::floor(span / delta_t)) + 1;
  const std::size_t p = skeleton.initial.xi.size();
  std::vector<std::vector<double>> out(p, std::vector<double>(n_samples));

  std::size_t k = 0;
  replay(skeleton, [&](double a, double b, std::span<const double> xi,
                       std::span<const double> v) {
    while (k < n_samples) {
      const double ts = t_from + static_cast<double>(k) * delta_t;
      if (ts >= b) break;
      if (ts >= a) {
        for (std::size_t i = 0; i < p; ++i) out[i][k] = xi[i] + v[i] * (ts - a);
      }
      ++k;
    }
  });
  // samples at (or, by rounding, just past) the final time
  for (; k < n_samples; ++k) {
    for (std::size_t i = 0; i < p; ++i) out[i][k] = skeleton.final_state.xi[i];
  }
  return out;
}

static double autocovariance(std::span<const double> x, double mean, int lag) {
  const std::size_t n = x.size();
  double s = 0.0;
  for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < n; ++t)
    s += (x[t] - mean) * (x[t + static_cast<std::size_t>(lag)] - mean);
  return s / static_cast<double>(n);  // biased estimator
}

double iact(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw std::invalid_argument("iact: need at least 100 samples");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  const double c0 = autocovariance(series, mean, 0);
  // constant series (up to rounding in the mean): undefined
  if (!(c0 > 1e-20 * (1.0 + mean * mean))) return kInf;

  // 1 + 2 sum_k rho_k, truncated by the initial positive sequence rule:
  // rho_k enters the sum, then the sum stops once rho_k + rho_{k+1} <= 0.
  double sum = 0.0;
  double rho_k = autocovariance(series, mean, 1) / c0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double rho_next = autocovariance(series, mean, static_cast<int>(k) + 1) / c0;
    sum += rho_k;
    if (rho_k + rho_next <= 0.0) break;
    rho_k = rho_next;
  }
  return 1.0 + 2.0 * sum;
}

std::vector<double> autocorrelation(std::span<const double> series, int max_lag) {
  if (series.size() < 2) throw std::invalid_argument("autocorrelation: series too short");
  if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= series.size())
    throw std::invalid_argument("autocorrelation: lag out of range");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(series.size());
  const double c0 = autocovariance(series, mean, 0);
  std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1, 1.0);
  if (!(c0 > 0.0)) return rho;
  for (int k = 1; k <= max_lag; ++k)
    rho[static_cast<std::size_t>(k)] = autocovariance(series, mean, k) / c0;
  return rho;
}

MixingReport mixing_report(const Skeleton& skeleton, double t_from, int min_samples) {
  const std::size_t p = skeleton.initial.xi.size();
  MixingReport report;
  report.iact_per_dim.assign(p, kInf);
  report.ess.assign(p, 0.0);
  report.asym_variance.assign(p, kInf);
  const double span = skeleton.final_state.t - t_from;
  if (!(span > 0.0)) {
    report.mixing_time = kInf;
    report.n_samples = 1;
    return report;
  }
  report.delta_t = span / static_cast<double>(min_samples);
  const auto samples = discretize(skeleton, report.delta_t, t_from);
  report.n_samples = static_cast<int>(samples.front().size());
  report.mixing_time = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    double tau = iact(samples[i]);
    if (std::isfinite(tau)) tau = std::max(tau, 1.0);
    report.iact_per_dim[i] = tau;
    report.ess[i] = std::isfinite(tau) ? static_cast<double>(report.n_samples) / tau : 0.0;
    report.mixing_time = std::max(report.mixing_time, tau);
    if (std::isfinite(tau)) {
      double mean = 0.0;
      for (double x : samples[i]) mean += x;
      mean /= static_cast<double>(samples[i].size());
      double var = 0.0;
      for (double x : samples[i]) var += (x - mean) * (x - mean);
      var /= static_cast<double>(samples[i].size());
      report.asym_variance[i] = tau * var;
    }
  }
  return report;
}

double efficiency_gain(std::span<const double> numerators,
                       std::span<const double> denominators) {
  if (numerators.size() != denominators.size() || numerators.empty())
    throw std::invalid_argument("efficiency_gain: need equal-length nonempty lists");
  double s = 0.0;
  for (std::size_t k = 0; k < numerators.size(); ++k) {
    if (denominators[k] == 0.0)
      throw std::invalid_argument("efficiency_gain: zero denominator");
    s += numerators[k] / denominators[k];
  }
  return s / static_cast<double>(numerators.size());
}

}  // namespace zz
