// aarch64 only: Advanced SIMD is part of the base ISA there.
#include "raga/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace raga::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double l1_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vabdq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

void l1_sign_update_neon(const double* a, const double* b, double w, double* ga, double* gb,
                         std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t pos = vdupq_n_f64(w);
  const float64x2_t neg = vdupq_n_f64(-w);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const uint64x2_t gt = vcgtq_f64(d, zero);
    const uint64x2_t lt = vcltq_f64(d, zero);
    const float64x2_t s = vreinterpretq_f64_u64(
        vorrq_u64(vandq_u64(gt, vreinterpretq_u64_f64(pos)),
                  vandq_u64(lt, vreinterpretq_u64_f64(neg))));
    vst1q_f64(ga + i, vaddq_f64(vld1q_f64(ga + i), s));
    vst1q_f64(gb + i, vsubq_f64(vld1q_f64(gb + i), s));
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    const double s = d > 0.0 ? w : (d < 0.0 ? -w : 0.0);
    ga[i] += s;
    gb[i] -= s;
  }
}

constexpr KernelTable kNeon{Isa::Neon, dot_neon, axpy_neon, l1_neon, l1_sign_update_neon};

}  // namespace

const KernelTable& neon_table() noexcept { return kNeon; }

}  // namespace raga::kernels
