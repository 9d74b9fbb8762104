#include "raga/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace raga::kernels {
namespace {

bool force_scalar_from_env() {
  const char* v = std::getenv("RAGA_FORCE_SCALAR");
  return v != nullptr && std::strcmp(v, "") != 0 && std::strcmp(v, "0") != 0;
}

const KernelTable* best_table() noexcept {
  if (force_scalar_from_env()) return &scalar_table();
#if defined(RAGA_HAVE_AVX2)
  if (isa_supported(Isa::Avx2)) return &avx2_table();
#endif
#if defined(RAGA_HAVE_NEON)
  return &neon_table();
#endif
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> table{best_table()};
  return table;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(RAGA_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(RAGA_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

bool set_kernel_isa(Isa isa) noexcept {
  if (!isa_supported(isa)) return false;
  switch (isa) {
    case Isa::Scalar:
      slot().store(&scalar_table());
      return true;
    case Isa::Avx2:
#if defined(RAGA_HAVE_AVX2)
      slot().store(&avx2_table());
      return true;
#else
      return false;
#endif
    case Isa::Neon:
#if defined(RAGA_HAVE_NEON)
      slot().store(&neon_table());
      return true;
#else
      return false;
#endif
  }
  return false;
}

void reset_kernel_isa() noexcept { slot().store(best_table()); }

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace raga::kernels
