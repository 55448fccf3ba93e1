// Shared oracles and fixtures for the unit and acceptance suites. Everything
// here is independent of the library's sampling path: finite differences,
// exhaustive enumeration, quadrature and plain counting.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "zz/dataset.hpp"
#include "zz/model.hpp"
#include "zz/prior.hpp"
#include "zz/rng.hpp"
#include "zz/subsample.hpp"

namespace zztest {

// ---- random instances ----

struct Instance {
  zz::Dataset data;
  std::vector<double> xi;
};

// Random sparse logistic instance; covariates N(0,1) kept with probability
// `density`, responses fair coins, xi uniform on [-2,2]^p.
inline Instance random_instance(std::uint64_t seed, int n, int p,
                                double density = 0.7) {
  zz::Rng rng(seed);
  std::vector<std::vector<zz::SparseEntry>> cols(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < density) {
        const double v = rng.normal();
        if (v != 0.0) cols[static_cast<std::size_t>(i)].push_back({j, v});
      }
    }
  }
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int& v : y) v = rng.uniform() < 0.5 ? 1 : 0;
  std::vector<double> xi(static_cast<std::size_t>(p));
  for (double& v : xi) v = 4.0 * rng.uniform() - 2.0;
  return {zz::Dataset::from_columns(n, p, std::move(cols), std::move(y)), std::move(xi)};
}

// ---- finite differences ----

// central difference of a scalar function, step h
inline double fd_derivative(const std::function<double(double)>& f, double x,
                            double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double fd_grad_term(const zz::Dataset& data, int j, int i,
                           std::vector<double> xi, double h = 1e-6) {
  auto f = [&](double v) {
    xi[static_cast<std::size_t>(i)] = v;
    return zz::likelihood_term_potential(data, j, xi);
  };
  const double x0 = xi[static_cast<std::size_t>(i)];
  return fd_derivative(f, x0, h);
}

// ---- exhaustive batch expectation ----

// candidate observation lists and probabilities per batch slot, mirroring
// the scheme's batch distribution mu_i
inline void batch_space(const zz::SubsamplingScheme& scheme, const zz::Dataset& data,
                        int i, std::vector<std::vector<int>>& candidates,
                        std::vector<std::vector<double>>& probs) {
  candidates.clear();
  probs.clear();
  switch (scheme.family()) {
    case zz::SchemeFamily::uniform: {
      std::vector<int> all(static_cast<std::size_t>(data.n()));
      std::iota(all.begin(), all.end(), 0);
      std::vector<double> pr(all.size(), 1.0 / data.n());
      candidates.assign(static_cast<std::size_t>(scheme.minibatch()), all);
      probs.assign(static_cast<std::size_t>(scheme.minibatch()), pr);
      return;
    }
    case zz::SchemeFamily::importance: {
      std::vector<int> support;
      std::vector<double> pr;
      for (const zz::SparseEntry& e : data.column(i)) {
        support.push_back(e.index);
        pr.push_back(scheme.omega(i, e.index, data));
      }
      candidates.assign(static_cast<std::size_t>(scheme.minibatch()), support);
      probs.assign(static_cast<std::size_t>(scheme.minibatch()), pr);
      return;
    }
    case zz::SchemeFamily::stratified: {
      for (const auto& members : scheme.strata(i)) {
        candidates.push_back(members);
        probs.emplace_back(members.size(), 1.0 / static_cast<double>(members.size()));
      }
      return;
    }
    case zz::SchemeFamily::stratified_importance: {
      for (const auto& members : scheme.strata(i)) {
        std::vector<double> pr(members.size());
        double total = 0.0;
        for (std::size_t k = 0; k < members.size(); ++k) {
          pr[k] = std::fabs(data.value_at(members[k], i));
          total += pr[k];
        }
        for (double& v : pr) v /= total;
        candidates.push_back(members);
        probs.push_back(std::move(pr));
      }
      return;
    }
  }
}

// E over all batches of fn(batch); probability-weighted full enumeration
inline double enumerate_expectation(
    const std::vector<std::vector<int>>& candidates,
    const std::vector<std::vector<double>>& probs,
    const std::function<double(const std::vector<int>&)>& fn) {
  std::vector<std::size_t> odo(candidates.size(), 0);
  std::vector<int> batch(candidates.size());
  double acc = 0.0;
  bool done = false;
  while (!done) {
    double prob = 1.0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      batch[k] = candidates[k][odo[k]];
      prob *= probs[k][odo[k]];
    }
    acc += prob * fn(batch);
    done = true;
    for (std::size_t k = 0; k < odo.size(); ++k) {
      if (++odo[k] < candidates[k].size()) {
        done = false;
        break;
      }
      odo[k] = 0;
    }
  }
  return acc;
}

// ---- statistics ----

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sd_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Kolmogorov-Smirnov distance of samples against an exact CDF
inline double ks_distance(std::vector<double> samples,
                          const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double ks = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double f = cdf(samples[k]);
    ks = std::max(ks, std::fabs(f - static_cast<double>(k) / n));
    ks = std::max(ks, std::fabs(f - static_cast<double>(k + 1) / n));
  }
  return ks;
}

// ---- quadrature over the posterior (p = 1 or 2) ----

struct QuadratureResult {
  std::vector<double> mean;
  std::vector<double> variance;
};

// dense grid quadrature of the logistic posterior on [lo,hi]^p
inline QuadratureResult grid_posterior(const zz::Dataset& data, const zz::Prior& prior,
                                       double lo, double hi, int points) {
  const int p = data.p();
  QuadratureResult out;
  out.mean.assign(static_cast<std::size_t>(p), 0.0);
  out.variance.assign(static_cast<std::size_t>(p), 0.0);
  const double step = (hi - lo) / (points - 1);

  if (p == 1) {
    double z = 0.0, m = 0.0, m2 = 0.0, umin = 1e300;
    std::vector<double> us(static_cast<std::size_t>(points));
    for (int a = 0; a < points; ++a) {
      const double x = lo + a * step;
      const std::vector<double> xi{x};
      us[static_cast<std::size_t>(a)] =
          zz::likelihood_potential(data, xi) + zz::prior_potential(prior, xi);
      umin = std::min(umin, us[static_cast<std::size_t>(a)]);
    }
    for (int a = 0; a < points; ++a) {
      const double x = lo + a * step;
      const double w = std::exp(-(us[static_cast<std::size_t>(a)] - umin));
      z += w;
      m += w * x;
      m2 += w * x * x;
    }
    out.mean[0] = m / z;
    out.variance[0] = m2 / z - out.mean[0] * out.mean[0];
    return out;
  }

  if (p != 2) throw std::invalid_argument("grid_posterior: p must be 1 or 2");
  // first pass for the potential minimum keeps the weights in range
  double umin = 1e300;
  std::vector<double> xi(2);
  std::vector<double> row_u(static_cast<std::size_t>(points));
  std::vector<std::vector<double>> u(static_cast<std::size_t>(points), row_u);
  for (int a = 0; a < points; ++a) {
    xi[0] = lo + a * step;
    for (int b = 0; b < points; ++b) {
      xi[1] = lo + b * step;
      const double v =
          zz::likelihood_potential(data, xi) + zz::prior_potential(prior, xi);
      u[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
      umin = std::min(umin, v);
    }
  }
  double z = 0.0, mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0;
  for (int a = 0; a < points; ++a) {
    const double x = lo + a * step;
    for (int b = 0; b < points; ++b) {
      const double y = lo + b * step;
      const double w =
          std::exp(-(u[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] - umin));
      z += w;
      mx += w * x;
      my += w * y;
      mxx += w * x * x;
      myy += w * y * y;
    }
  }
  out.mean[0] = mx / z;
  out.mean[1] = my / z;
  out.variance[0] = mxx / z - out.mean[0] * out.mean[0];
  out.variance[1] = myy / z - out.mean[1] * out.mean[1];
  return out;
}

}  // namespace zztest
