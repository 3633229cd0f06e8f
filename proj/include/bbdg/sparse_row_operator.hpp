#pragma once

// Fixed-width row storage: every row carries `width` (value, column) slots.
// Unused slots hold column 0 with value 0, so application is branch free.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace bbdg {

/// Counts multiply-adds executed by instrumented apply paths.
struct OpCounter {
  std::uint64_t madds = 0;
  void add(std::uint64_t n) { madds += n; }
};

template <typename Real>
class SparseRowOperator {
 public:
  SparseRowOperator() = default;

  SparseRowOperator(int rows, int cols, int width, std::vector<Real> values, std::vector<int> columns)
      : SparseRowOperator(rows, cols, width, std::make_shared<const std::vector<Real>>(std::move(values)),
                          std::make_shared<const std::vector<int>>(std::move(columns))) {}

  /// Shares storage with other operators (the barycentric derivatives reuse
  /// one values array).
  SparseRowOperator(int rows, int cols, int width, std::shared_ptr<const std::vector<Real>> values,
                    std::shared_ptr<const std::vector<int>> columns)
      : rows_(rows), cols_(cols), width_(width), values_(std::move(values)), columns_(std::move(columns)) {
    const auto n = static_cast<std::size_t>(rows_) * static_cast<std::size_t>(width_);
    if (!values_ || !columns_ || values_->size() != n || columns_->size() != n) {
      throw std::invalid_argument("SparseRowOperator: storage does not match rows x width");
    }
    for (int c : *columns_) {
      if (c < 0 || c >= cols_) throw std::out_of_range("SparseRowOperator: column index out of range");
    }
  }

  /// Compresses a dense matrix; entries with |a_ij| <= drop_tol are omitted.
  static SparseRowOperator from_dense(const Eigen::MatrixXd& a, double drop_tol = 0.0) {
    const int rows = static_cast<int>(a.rows());
    const int cols = static_cast<int>(a.cols());
    int width = 1;
    for (int i = 0; i < rows; ++i) {
      int nnz = 0;
      for (int j = 0; j < cols; ++j) nnz += std::abs(a(i, j)) > drop_tol ? 1 : 0;
      width = std::max(width, nnz);
    }
    std::vector<Real> vals(static_cast<std::size_t>(rows * width), Real(0));
    std::vector<int> idx(static_cast<std::size_t>(rows * width), 0);
    for (int i = 0; i < rows; ++i) {
      int slot = 0;
      for (int j = 0; j < cols; ++j) {
        if (std::abs(a(i, j)) > drop_tol) {
          vals[static_cast<std::size_t>(i * width + slot)] = static_cast<Real>(a(i, j));
          idx[static_cast<std::size_t>(i * width + slot)] = j;
          ++slot;
        }
      }
    }
    return SparseRowOperator(rows, cols, width, std::move(vals), std::move(idx));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int width() const { return width_; }
  std::span<const Real> values() const { return *values_; }
  std::span<const int> columns() const { return *columns_; }
  const std::vector<Real>* values_storage() const { return values_.get(); }

  Real value(int row, int slot) const { return (*values_)[static_cast<std::size_t>(row * width_ + slot)]; }
  int column(int row, int slot) const { return (*columns_)[static_cast<std::size_t>(row * width_ + slot)]; }

  /// y = A x
  void apply(std::span<const Real> x, std::span<Real> y, OpCounter* counter = nullptr) const {
    check_sizes(x, y);
    const Real* v = values_->data();
    const int* c = columns_->data();
    for (int i = 0; i < rows_; ++i) {
      Real acc = 0;
      for (int j = 0; j < width_; ++j) acc += v[i * width_ + j] * x[static_cast<std::size_t>(c[i * width_ + j])];
      y[static_cast<std::size_t>(i)] = acc;
    }
    if (counter) counter->add(static_cast<std::uint64_t>(rows_) * static_cast<std::uint64_t>(width_));
  }

  /// y += A x
  void apply_add(std::span<const Real> x, std::span<Real> y, OpCounter* counter = nullptr) const {
    check_sizes(x, y);
    const Real* v = values_->data();
    const int* c = columns_->data();
    for (int i = 0; i < rows_; ++i) {
      Real acc = 0;
      for (int j = 0; j < width_; ++j) acc += v[i * width_ + j] * x[static_cast<std::size_t>(c[i * width_ + j])];
      y[static_cast<std::size_t>(i)] += acc;
    }
    if (counter) counter->add(static_cast<std::uint64_t>(rows_) * static_cast<std::uint64_t>(width_));
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows_, cols_);
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < width_; ++j) a(i, column(i, j)) += static_cast<double>(value(i, j));
    }
    return a;
  }

  /// Largest / mean number of stored entries with nonzero value per row.
  int max_row_nnz() const {
    int best = 0;
    for (int i = 0; i < rows_; ++i) best = std::max(best, row_nnz(i));
    return best;
  }
  double mean_row_nnz() const {
    if (rows_ == 0) return 0.0;
    long total = 0;
    for (int i = 0; i < rows_; ++i) total += row_nnz(i);
    return static_cast<double>(total) / rows_;
  }
  int row_nnz(int row) const {
    int n = 0;
    for (int j = 0; j < width_; ++j) n += value(row, j) != Real(0) ? 1 : 0;
    return n;
  }

  template <typename To>
  SparseRowOperator<To> cast() const {
    std::vector<To> vals(values_->begin(), values_->end());
    return SparseRowOperator<To>(rows_, cols_, width_, std::move(vals), std::vector<int>(*columns_));
  }

 private:
  void check_sizes(std::span<const Real> x, std::span<Real> y) const {
    if (static_cast<int>(x.size()) != cols_ || static_cast<int>(y.size()) != rows_) {
      throw std::invalid_argument("SparseRowOperator: size mismatch");
    }
  }

  int rows_ = 0;
  int cols_ = 0;
  int width_ = 0;
  std::shared_ptr<const std::vector<Real>> values_ = std::make_shared<const std::vector<Real>>();
  std::shared_ptr<const std::vector<int>> columns_ = std::make_shared<const std::vector<int>>();
};

}  // namespace bbdg
