#include "raga/kernels.hpp"

#include <cmath>

namespace raga::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double l1_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

void l1_sign_update_scalar(const double* a, const double* b, double w, double* ga, double* gb,
                           std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    const double s = d > 0.0 ? w : (d < 0.0 ? -w : 0.0);
    ga[i] += s;
    gb[i] -= s;
  }
}

constexpr KernelTable kScalar{Isa::Scalar, dot_scalar, axpy_scalar, l1_scalar,
                              l1_sign_update_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace raga::kernels
