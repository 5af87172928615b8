#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace phaseid {

/// Dense column-major matrix of doubles. Column-major because every
/// algorithm in this library consumes whole per-meter time series, which
/// are stored one per column.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  /// New matrix holding rows [start, start+count) of every column.
  Matrix slice_rows(std::size_t start, std::size_t count) const {
    if (start + count > rows_) throw std::out_of_range("Matrix::slice_rows: range exceeds row count");
    Matrix out(count, cols_);
    for (std::size_t c = 0; c < cols_; ++c) {
      const double* src = data_.data() + c * rows_ + start;
      double* dst = out.data_.data() + c * count;
      for (std::size_t r = 0; r < count; ++r) dst[r] = src[r];
    }
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace phaseid
