#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace zz {

struct SparseEntry {
  int index;     // observation j in a column view, dimension i in a row view
  double value;  // never exactly 0
};

// Design matrix for binary regression, stored sparse in column-major form:
// for each dimension i the list of (j, x_i^j) with x_i^j != 0, sorted by j.
// A row-major mirror is kept for the per-observation dot products the
// likelihood needs; both views are built once and immutable afterwards, so a
// Dataset can be shared read-only across concurrent chains.
class Dataset {
 public:
  // Dense row-major input; entries equal to exactly 0.0 are dropped.
  static Dataset from_dense(int n, int p, std::span<const double> row_major,
                            std::span<const int> y);

  // Column lists must be sorted by observation index, without zero values.
  static Dataset from_columns(int n, int p,
                              std::vector<std::vector<SparseEntry>> columns,
                              std::vector<int> y);

  int n() const { return n_; }
  int p() const { return p_; }
  int response(int j) const { return y_[static_cast<std::size_t>(j)]; }
  const std::vector<int>& responses() const { return y_; }

  const std::vector<SparseEntry>& column(int i) const {
    return cols_[static_cast<std::size_t>(i)];
  }
  const std::vector<SparseEntry>& row(int j) const {
    return rows_[static_cast<std::size_t>(j)];
  }

  // ||x^j||_2, precomputed at construction
  double row_norm(int j) const { return row_norms_[static_cast<std::size_t>(j)]; }

  // x_i^j, 0.0 when not stored
  double value_at(int j, int i) const;

  std::size_t nnz() const { return nnz_; }

 private:
  Dataset() = default;
  void finish();  // validates, builds row mirror and norms

  int n_ = 0;
  int p_ = 0;
  std::vector<int> y_;
  std::vector<std::vector<SparseEntry>> cols_;
  std::vector<std::vector<SparseEntry>> rows_;
  std::vector<double> row_norms_;
  std::size_t nnz_ = 0;
};

}  // namespace zz
