#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace raga {

/// Raised when operand shapes do not fit an operation. The message names the
/// operation and both shapes.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Takes ownership of `data`; rejects a length mismatch or non-finite entries.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  /// Row-list literal, handy in tests: Matrix::from_rows({{1, 2}, {3, 4}}).
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double v);
  bool all_finite() const noexcept;
  /// Throws std::domain_error naming `where` if any entry is NaN or infinite.
  void require_finite(const std::string& where) const;

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

/// Throws DimensionError("<op>: shapes AxB and CxD ...") when `ok` is false.
void require_shape(bool ok, const char* op, const Matrix& a, const Matrix& b);

/// A trainable tensor and its accumulated gradient.
struct Parameter {
  Matrix value;
  Matrix gradient;

  Parameter() = default;
  explicit Parameter(Matrix v) : value(std::move(v)), gradient(value.rows(), value.cols()) {}

  void zero_grad() { gradient = Matrix(value.rows(), value.cols()); }
};

// Plain (non-differentiated) kernels. They route the inner loops through the
// runtime-selected SIMD table.
Matrix matmul(const Matrix& a, const Matrix& b);
/// Pairwise Manhattan distances: out(i, j) = sum_d |a(i, d) - b(j, d)|.
Matrix l1_row_distance(const Matrix& a, const Matrix& b, int threads = 1);
Matrix transpose(const Matrix& a);
/// Scales every row to unit L2 norm; all-zero rows are left untouched.
void normalize_rows_l2(Matrix& m);

}  // namespace raga
