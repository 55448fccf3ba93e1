#pragma once

#include <span>
#include <vector>

#include "zz/dataset.hpp"

namespace zz {

// Per-term bound constants of the logistic potential decomposition
// U = U^0 + sum_j U^j. For logistic regression the partial derivatives are
// uniformly bounded with c_i^j = |x_i^j| and globally Lipschitz (r = 2) with
// C_i^j = |x_i^j| ||x^j||_2 / 4. Per-dimension lists are aligned with the
// dataset's sparse columns; entries for x_i^j = 0 are identically 0 and
// therefore omitted.
struct BoundConstants {
  std::vector<std::vector<double>> c;  // uniform bounds, per column support
  std::vector<std::vector<double>> C;  // Lipschitz constants, per column support
  std::vector<double> c_bar;           // sum_j c_i^j
  std::vector<double> C_bar;           // sum_j C_i^j
  std::vector<double> c_max;           // max_j c_i^j (0 for empty columns)
  std::vector<double> C_max;           // max_j C_i^j
};

BoundConstants compute_bound_constants(const Dataset& data);

double sigmoid(double z);

// (x^j)^T xi over the sparse support of observation j
double dot_row(const Dataset& data, int j, std::span<const double> xi);

// U^j(xi) = -y^j (x^j)^T xi + log(1 + exp((x^j)^T xi)), evaluated stably
double likelihood_term_potential(const Dataset& data, int j,
                                 std::span<const double> xi);
double likelihood_potential(const Dataset& data, std::span<const double> xi);

// d/dxi_i U^j(xi) = x_i^j (sigmoid((x^j)^T xi) - y^j); exactly 0 when
// x_i^j = 0, and |result| <= c_i^j always.
double likelihood_grad_term(const Dataset& data, int j, int i,
                            std::span<const double> xi);

// d/dxi_i U^bullet(xi) = sum_j d/dxi_i U^j(xi); iterates only the nonzero
// column support of dimension i.
double likelihood_grad_full(const Dataset& data, int i,
                            std::span<const double> xi);

}  // namespace zz
