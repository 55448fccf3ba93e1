#include "zz/prior.hpp"

#include <cmath>
#include <stdexcept>

namespace zz {

static void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

Prior Prior::gaussian(double variance) {
  require_positive(variance, "gaussian variance");
  Prior p;
  p.kind = PriorKind::gaussian;
  p.variance = variance;
  return p;
}

Prior Prior::cauchy(double scale) {
  require_positive(scale, "cauchy scale");
  Prior p;
  p.kind = PriorKind::cauchy;
  p.scale = scale;
  return p;
}

Prior Prior::gdp(double shape, double scale) {
  require_positive(shape, "gdp shape");
  require_positive(scale, "gdp scale");
  Prior p;
  p.kind = PriorKind::gdp;
  p.shape = shape;
  p.scale = scale;
  return p;
}

Prior Prior::laplace(double b) {
  require_positive(b, "laplace scale");
  Prior p;
  p.kind = PriorKind::laplace;
  p.scale = b;
  return p;
}

std::string Prior::describe() const {
  switch (kind) {
    case PriorKind::gaussian: return "gaussian(var=" + std::to_string(variance) + ")";
    case PriorKind::cauchy: return "cauchy(scale=" + std::to_string(scale) + ")";
    case PriorKind::gdp:
      return "gdp(shape=" + std::to_string(shape) + ",scale=" + std::to_string(scale) + ")";
    case PriorKind::laplace: return "laplace(b=" + std::to_string(scale) + ")";
  }
  return "?";
}

double prior_grad(const Prior& prior, double xi_i) {
  switch (prior.kind) {
    case PriorKind::gaussian:
      return xi_i / prior.variance;
    case PriorKind::cauchy: {
      const double u = xi_i / prior.scale;
      return (2.0 * xi_i / (prior.scale * prior.scale)) / (1.0 + u * u);
    }
    case PriorKind::gdp: {
      if (xi_i == 0.0) return 0.0;
      const double sign = xi_i > 0.0 ? 1.0 : -1.0;
      return sign * (1.0 + prior.shape) / (prior.shape * prior.scale + std::fabs(xi_i));
    }
    case PriorKind::laplace: {
      if (xi_i == 0.0) return 0.0;
      return (xi_i > 0.0 ? 1.0 : -1.0) / prior.scale;
    }
  }
  return 0.0;
}

double prior_potential_term(const Prior& prior, double xi_i) {
  switch (prior.kind) {
    case PriorKind::gaussian:
      return 0.5 * xi_i * xi_i / prior.variance;
    case PriorKind::cauchy: {
      const double u = xi_i / prior.scale;
      return std::log1p(u * u);
    }
    case PriorKind::gdp:
      return (1.0 + prior.shape) *
             std::log1p(std::fabs(xi_i) / (prior.shape * prior.scale));
    case PriorKind::laplace:
      return std::fabs(xi_i) / prior.scale;
  }
  return 0.0;
}

double prior_potential(const Prior& prior, std::span<const double> xi) {
  double u = 0.0;
  for (double v : xi) u += prior_potential_term(prior, v);
  return u;
}

RateBound prior_rate_params(const Prior& prior, int i, const ZigZagState& state) {
  const std::size_t k = static_cast<std::size_t>(i);
  const double a_i = state.alpha[k];
  switch (prior.kind) {
    case PriorKind::gaussian:
      // exact rate {theta_i alpha_i (xi_i + theta_i alpha_i t) / sigma^2}^+
      return {a_i * state.theta[k] * state.xi[k] / prior.variance,
              a_i * a_i / prior.variance};
    case PriorKind::cauchy:
      // |2u/(1+u^2)| <= 1 gives the constant bound alpha_i / s
      return {a_i / prior.scale, 0.0};
    case PriorKind::gdp:
      return {a_i * (1.0 + prior.shape) / (prior.shape * prior.scale), 0.0};
    case PriorKind::laplace:
      return {a_i / prior.scale, 0.0};
  }
  return {0.0, 0.0};
}

}  // namespace zz
