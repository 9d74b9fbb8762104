// Built with -mavx2; only reached after the dispatcher has checked the CPU.
#include "raga/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace raga::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // mul then add, not fmadd: keeps results identical to the scalar kernel
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double l1_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(sign, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_andnot_pd(sign, d1));
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(sign, d0));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

void l1_sign_update_avx2(const double* a, const double* b, double w, double* ga, double* gb,
                         std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d pos = _mm256_set1_pd(w);
  const __m256d neg = _mm256_set1_pd(-w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d gt = _mm256_cmp_pd(d, zero, _CMP_GT_OQ);
    const __m256d lt = _mm256_cmp_pd(d, zero, _CMP_LT_OQ);
    const __m256d s = _mm256_or_pd(_mm256_and_pd(gt, pos), _mm256_and_pd(lt, neg));
    _mm256_storeu_pd(ga + i, _mm256_add_pd(_mm256_loadu_pd(ga + i), s));
    _mm256_storeu_pd(gb + i, _mm256_sub_pd(_mm256_loadu_pd(gb + i), s));
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    const double s = d > 0.0 ? w : (d < 0.0 ? -w : 0.0);
    ga[i] += s;
    gb[i] -= s;
  }
}

constexpr KernelTable kAvx2{Isa::Avx2, dot_avx2, axpy_avx2, l1_avx2, l1_sign_update_avx2};

}  // namespace

const KernelTable& avx2_table() noexcept { return kAvx2; }

}  // namespace raga::kernels
