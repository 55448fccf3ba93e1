#include "zz/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zz {

BoundConstants compute_bound_constants(const Dataset& data) {
  const int p = data.p();
  BoundConstants bc;
  bc.c.resize(static_cast<std::size_t>(p));
  bc.C.resize(static_cast<std::size_t>(p));
  bc.c_bar.assign(static_cast<std::size_t>(p), 0.0);
  bc.C_bar.assign(static_cast<std::size_t>(p), 0.0);
  bc.c_max.assign(static_cast<std::size_t>(p), 0.0);
  bc.C_max.assign(static_cast<std::size_t>(p), 0.0);
  for (int i = 0; i < p; ++i) {
    const auto& col = data.column(i);
    auto& ci = bc.c[static_cast<std::size_t>(i)];
    auto& Ci = bc.C[static_cast<std::size_t>(i)];
    ci.reserve(col.size());
    Ci.reserve(col.size());
    for (const SparseEntry& e : col) {
      const double c = std::fabs(e.value);
      const double C = c * data.row_norm(e.index) / 4.0;
      ci.push_back(c);
      Ci.push_back(C);
      bc.c_bar[static_cast<std::size_t>(i)] += c;
      bc.C_bar[static_cast<std::size_t>(i)] += C;
      bc.c_max[static_cast<std::size_t>(i)] = std::max(bc.c_max[static_cast<std::size_t>(i)], c);
      bc.C_max[static_cast<std::size_t>(i)] = std::max(bc.C_max[static_cast<std::size_t>(i)], C);
    }
  }
  return bc;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dot_row(const Dataset& data, int j, std::span<const double> xi) {
  double z = 0.0;
  for (const SparseEntry& e : data.row(j)) z += e.value * xi[static_cast<std::size_t>(e.index)];
  return z;
}

double likelihood_term_potential(const Dataset& data, int j,
                                 std::span<const double> xi) {
  const double z = dot_row(data, j, xi);
  // log(1 + e^z) without overflow
  const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return -static_cast<double>(data.response(j)) * z + softplus;
}

double likelihood_potential(const Dataset& data, std::span<const double> xi) {
  double u = 0.0;
  for (int j = 0; j < data.n(); ++j) u += likelihood_term_potential(data, j, xi);
  return u;
}

static void check_indices(const Dataset& data, int j, int i) {
  if (j < 0 || j >= data.n() || i < 0 || i >= data.p())
    throw std::invalid_argument("likelihood gradient: index out of range");
}

double likelihood_grad_term(const Dataset& data, int j, int i,
                            std::span<const double> xi) {
  check_indices(data, j, i);
  const double x = data.value_at(j, i);
  if (x == 0.0) return 0.0;
  const double z = dot_row(data, j, xi);
  return x * (sigmoid(z) - static_cast<double>(data.response(j)));
}

double likelihood_grad_full(const Dataset& data, int i, std::span<const double> xi) {
  if (i < 0 || i >= data.p())
    throw std::invalid_argument("likelihood gradient: index out of range");
  double g = 0.0;
  for (const SparseEntry& e : data.column(i)) {
    const double z = dot_row(data, e.index, xi);
    g += e.value * (sigmoid(z) - static_cast<double>(data.response(e.index)));
  }
  return g;
}

}  // namespace zz
