#include "zz/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace zz {

Dataset Dataset::from_dense(int n, int p, std::span<const double> row_major,
                            std::span<const int> y) {
  if (n <= 0 || p <= 0) throw std::invalid_argument("dataset: empty shape");
  if (row_major.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(p))
    throw std::invalid_argument("dataset: dense size mismatch");
  std::vector<std::vector<SparseEntry>> cols(static_cast<std::size_t>(p));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < p; ++i) {
      const double v = row_major[static_cast<std::size_t>(j) * p + i];
      if (v != 0.0) cols[static_cast<std::size_t>(i)].push_back({j, v});
    }
  }
  return from_columns(n, p, std::move(cols), std::vector<int>(y.begin(), y.end()));
}

Dataset Dataset::from_columns(int n, int p,
                              std::vector<std::vector<SparseEntry>> columns,
                              std::vector<int> y) {
  if (n <= 0 || p <= 0) throw std::invalid_argument("dataset: empty shape");
  if (columns.size() != static_cast<std::size_t>(p))
    throw std::invalid_argument("dataset: column count mismatch");
  if (y.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("dataset: response length mismatch");
  Dataset data;
  data.n_ = n;
  data.p_ = p;
  data.cols_ = std::move(columns);
  data.y_ = std::move(y);
  data.finish();
  return data;
}

void Dataset::finish() {
  for (int v : y_) {
    if (v != 0 && v != 1)
      throw std::invalid_argument("dataset: responses must be 0 or 1");
  }
  rows_.assign(static_cast<std::size_t>(n_), {});
  nnz_ = 0;
  for (int i = 0; i < p_; ++i) {
    const auto& col = cols_[static_cast<std::size_t>(i)];
    int prev = -1;
    for (const SparseEntry& e : col) {
      if (e.index <= prev)
        throw std::invalid_argument("dataset: column " + std::to_string(i) +
                                    " not strictly sorted by observation");
      if (e.index < 0 || e.index >= n_)
        throw std::invalid_argument("dataset: observation index out of range");
      if (e.value == 0.0)
        throw std::invalid_argument("dataset: stored zero in column " +
                                    std::to_string(i));
      prev = e.index;
      rows_[static_cast<std::size_t>(e.index)].push_back({i, e.value});
      ++nnz_;
    }
  }
  row_norms_.resize(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    double s = 0.0;
    for (const SparseEntry& e : rows_[static_cast<std::size_t>(j)]) s += e.value * e.value;
    row_norms_[static_cast<std::size_t>(j)] = std::sqrt(s);
  }
}

double Dataset::value_at(int j, int i) const {
  if (j < 0 || j >= n_ || i < 0 || i >= p_)
    throw std::invalid_argument("dataset: index out of range");
  const auto& row = rows_[static_cast<std::size_t>(j)];
  auto it = std::lower_bound(row.begin(), row.end(), i,
                             [](const SparseEntry& e, int key) { return e.index < key; });
  if (it != row.end() && it->index == i) return it->value;
  return 0.0;
}

}  // namespace zz
