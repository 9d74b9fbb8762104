#include "raga/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "raga/kernels.hpp"

namespace raga {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("Matrix: data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  require_finite("Matrix");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Matrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::require_finite(const std::string& where) const {
  if (!all_finite()) throw std::domain_error(where + ": non-finite entry");
}

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_shape(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
                         shape_string(b));
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_shape(a.cols() == b.rows(), "matmul", a, b);
  const auto& k = kernels::active();
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double s = a(i, p);
      if (s != 0.0) k.axpy(s, b.row(p).data(), dst, b.cols());
    }
  }
  return out;
}

Matrix l1_row_distance(const Matrix& a, const Matrix& b, int threads) {
  require_shape(a.cols() == b.cols(), "l1_row_distance", a, b);
  Matrix out(a.rows(), b.rows());
  const auto& k = kernels::active();
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double* ai = a.row(i).data();
      for (std::size_t j = 0; j < b.rows(); ++j) {
        out(i, j) = k.l1_distance(ai, b.row(j).data(), a.cols());
      }
    }
  };
  const std::size_t n_threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, a.rows() + 1);
  if (n_threads <= 1 || a.rows() < 64) {
    work(0, a.rows());
    return out;
  }
  // Rows are independent, so the result does not depend on the split.
  std::vector<std::thread> pool;
  const std::size_t chunk = (a.rows() + n_threads - 1) / n_threads;
  for (std::size_t lo = 0; lo < a.rows(); lo += chunk) {
    pool.emplace_back(work, lo, std::min(a.rows(), lo + chunk));
  }
  for (auto& t : pool) t.join();
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

void normalize_rows_l2(Matrix& m) {
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    const double norm = std::sqrt(k.dot(r.data(), r.data(), r.size()));
    if (norm > 0.0) {
      for (double& v : r) v /= norm;
    }
  }
}

}  // namespace raga
