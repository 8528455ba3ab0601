#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "surfpde/errors.hpp"
#include "surfpde/parallel.hpp"

namespace surfpde {

/// Compressed-row sparse matrix. Column indices are sorted and unique within
/// each row. The pattern is fixed after construction; values may be refreshed
/// in place, which is how per-step assemblies reuse the symbolic structure.
class SparseMatrix {
public:
  SparseMatrix() = default;

  static SparseMatrix identity(int n) {
    SparseMatrix a;
    a.rows_ = a.cols_ = n;
    a.row_ptr_.resize(n + 1);
    a.col_idx_.resize(n);
    a.vals_.assign(n, 1.0);
    for (int i = 0; i <= n; ++i) a.row_ptr_[i] = i;
    for (int i = 0; i < n; ++i) a.col_idx_[i] = i;
    return a;
  }

  /// Builds the pattern from per-row column lists (sorted + deduplicated
  /// here); all values start at zero.
  static SparseMatrix from_pattern(int rows, int cols,
                                   std::vector<std::vector<int>> cols_per_row) {
    if (rows < 0 || cols < 0 || cols_per_row.size() != static_cast<std::size_t>(rows))
      throw ValidationError("sparse pattern: row count mismatch");
    SparseMatrix a;
    a.rows_ = rows;
    a.cols_ = cols;
    a.row_ptr_.resize(rows + 1, 0);
    std::size_t nnz = 0;
    for (auto& row : cols_per_row) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      if (!row.empty() && (row.front() < 0 || row.back() >= cols))
        throw ValidationError("sparse pattern: column index out of range");
      nnz += row.size();
    }
    a.col_idx_.reserve(nnz);
    a.vals_.assign(nnz, 0.0);
    for (int i = 0; i < rows; ++i) {
      a.row_ptr_[i] = static_cast<int>(a.col_idx_.size());
      a.col_idx_.insert(a.col_idx_.end(), cols_per_row[i].begin(), cols_per_row[i].end());
    }
    a.row_ptr_[rows] = static_cast<int>(a.col_idx_.size());
    return a;
  }

  /// Builds from (row, col, value) triplets; duplicate entries are summed.
  static SparseMatrix from_triplets(int rows, int cols,
                                    std::span<const std::tuple<int, int, double>> triplets) {
    std::vector<std::vector<int>> pattern(rows);
    for (const auto& [i, j, v] : triplets) {
      (void)v;
      if (i < 0 || i >= rows || j < 0 || j >= cols)
        throw ValidationError("sparse triplets: index out of range");
      pattern[i].push_back(j);
    }
    SparseMatrix a = from_pattern(rows, cols, std::move(pattern));
    for (const auto& [i, j, v] : triplets) a.vals_[a.require(i, j)] += v;
    return a;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return vals_.size(); }

  std::span<const int> row_columns(int i) const {
    return {col_idx_.data() + row_ptr_[i], col_idx_.data() + row_ptr_[i + 1]};
  }
  std::span<const double> row_values(int i) const {
    return {vals_.data() + row_ptr_[i], vals_.data() + row_ptr_[i + 1]};
  }
  std::span<double> row_values(int i) {
    return {vals_.data() + row_ptr_[i], vals_.data() + row_ptr_[i + 1]};
  }
  const std::vector<double>& values() const { return vals_; }
  std::vector<double>& values() { return vals_; }
  const std::vector<int>& row_offsets() const { return row_ptr_; }
  const std::vector<int>& column_indices() const { return col_idx_; }

  /// Index into the value array for entry (i, j), or -1 when the entry is
  /// not part of the pattern.
  int find(int i, int j) const {
    const int* begin = col_idx_.data() + row_ptr_[i];
    const int* end = col_idx_.data() + row_ptr_[i + 1];
    const int* it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return -1;
    return static_cast<int>(it - col_idx_.data());
  }

  int require(int i, int j) const {
    int k = find(i, j);
    if (k < 0)
      throw ValidationError("sparse entry (" + std::to_string(i) + "," + std::to_string(j) +
                            ") not in pattern");
    return k;
  }

  double coeff(int i, int j) const {
    int k = find(i, j);
    return k < 0 ? 0.0 : vals_[k];
  }
  double& coeff_ref(int i, int j) { return vals_[require(i, j)]; }

  void set_zero() { std::fill(vals_.begin(), vals_.end(), 0.0); }

  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != cols_ || static_cast<int>(y.size()) != rows_)
      throw ValidationError("spmv: dimension mismatch");
    parallel_for(static_cast<std::size_t>(rows_), [&](std::size_t i) {
      double sum = 0.0;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) sum += vals_[k] * x[col_idx_[k]];
      y[i] = sum;
    });
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
  }

  std::vector<double> diagonal() const {
    int n = std::min(rows_, cols_);
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i) d[i] = coeff(i, i);
    return d;
  }

  bool values_finite() const {
    for (double v : vals_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : vals_) m = std::max(m, std::abs(v));
    return m;
  }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> vals_;
};

/// y = A x as a free function.
inline std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x) {
  return a.multiply(x);
}

} // namespace surfpde
