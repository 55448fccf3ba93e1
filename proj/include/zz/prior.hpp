#pragma once

#include <span>
#include <string>

#include "zz/events.hpp"
#include "zz/state.hpp"

namespace zz {

enum class PriorKind { gaussian, cauchy, gdp, laplace };

// Independent product prior over the coefficients. Only the parameters used
// by the chosen variant are meaningful.
struct Prior {
  PriorKind kind = PriorKind::gaussian;
  double variance = 1.0;  // gaussian sigma^2
  double scale = 2.5;     // cauchy s, gdp theta, laplace b
  double shape = 1.0;     // gdp alpha

  static Prior gaussian(double variance);
  static Prior cauchy(double scale = 2.5);
  static Prior gdp(double shape, double scale);
  static Prior laplace(double b);

  // The Gaussian prior has an exactly invertible linear rate; every other
  // variant is simulated by thinning against a constant envelope.
  bool exact_clock() const { return kind == PriorKind::gaussian; }

  std::string describe() const;
};

// d/dxi_i of the per-dimension prior potential. For the non-differentiable
// point xi_i = 0 of the GDP and Laplace variants the convention is 0; the
// process crosses such points with dwell time of measure zero.
double prior_grad(const Prior& prior, double xi_i);

// Per-dimension prior potential, additive constants dropped.
double prior_potential_term(const Prior& prior, double xi_i);
double prior_potential(const Prior& prior, std::span<const double> xi);

// Rate envelope for the prior clock of dimension i at the given state.
// Gaussian: the exact linear rate a + b t with a = alpha_i theta_i xi_i /
// sigma^2, b = alpha_i^2 / sigma^2 (no thinning needed). Cauchy: constant
// alpha_i / s. GDP: constant alpha_i (1+shape)/(shape*scale). Laplace:
// constant alpha_i / b.
RateBound prior_rate_params(const Prior& prior, int i, const ZigZagState& state);

}  // namespace zz
