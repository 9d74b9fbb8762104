#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop kernels with a scalar reference implementation and optional
// AVX2 (x86-64) or NEON (aarch64) variants. The variant is picked once at
// runtime from CPU features; `RAGA_FORCE_SCALAR=1` in the environment or
// set_kernel_isa() overrides it.
//
// axpy/scale/add_scaled/l1_sign_update are elementwise, so every variant is
// bit-identical to the scalar one (no FMA contraction is used). dot and
// l1_distance are reductions whose summation order differs per variant; they
// agree to rounding.

namespace raga::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// sum_i |a[i] - b[i]|
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
  /// ga[i] += w * sign(a[i] - b[i]); gb[i] -= w * sign(a[i] - b[i]); sign(0) = 0
  void (*l1_sign_update)(const double* a, const double* b, double w, double* ga, double* gb,
                         std::size_t n);
};

const KernelTable& scalar_table() noexcept;
#if defined(RAGA_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(RAGA_HAVE_NEON)
const KernelTable& neon_table() noexcept;
#endif

/// The table used by the library.
const KernelTable& active() noexcept;

bool isa_supported(Isa isa) noexcept;
/// Switches the active table. Returns false (and changes nothing) if the ISA
/// is not compiled in or not supported by this CPU.
bool set_kernel_isa(Isa isa) noexcept;
/// Restores the automatic choice.
void reset_kernel_isa() noexcept;

std::string_view isa_name(Isa isa) noexcept;

}  // namespace raga::kernels
