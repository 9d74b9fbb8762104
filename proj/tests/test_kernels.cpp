#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "raga/kernels.hpp"
#include "raga/matrix.hpp"

using namespace raga;
using kernels::Isa;
using kernels::KernelTable;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::vector<const KernelTable*> simd_tables() {
  std::vector<const KernelTable*> out;
#if defined(RAGA_HAVE_AVX2)
  if (kernels::isa_supported(Isa::Avx2)) out.push_back(&kernels::avx2_table());
#endif
#if defined(RAGA_HAVE_NEON)
  out.push_back(&kernels::neon_table());
#endif
  return out;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace

TEST_CASE("scalar kernels on hand values") {
  const KernelTable& s = kernels::scalar_table();
  const double a[] = {1, 2, 3}, b[] = {4, -5, 6};
  CHECK(s.dot(a, b, 3) == 1 * 4 - 2 * 5 + 3 * 6);
  CHECK(s.l1_distance(a, b, 3) == 3 + 7 + 3);
  double y[] = {1, 1, 1};
  s.axpy(2.0, a, y, 3);
  CHECK(y[0] == 3);
  CHECK(y[2] == 7);
  double ga[] = {0, 0, 0}, gb[] = {0, 0, 0};
  const double c[] = {1, 5, 3};
  s.l1_sign_update(a, c, 0.5, ga, gb, 3);
  CHECK(ga[0] == 0.0);  // equal entries contribute nothing
  CHECK(ga[1] == -0.5);
  CHECK(gb[1] == 0.5);
}

TEST_CASE("SIMD kernels agree with the scalar reference") {
  const auto tables = simd_tables();
  if (tables.empty()) {
    MESSAGE("no SIMD variant available on this machine; scalar only");
    return;
  }
  const KernelTable& ref = kernels::scalar_table();
  std::mt19937_64 rng(3);
  for (const KernelTable* t : tables) {
    INFO("isa = " << kernels::isa_name(t->isa));
    // Lengths cover empty, tails shorter than a vector and several blocks.
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 100u, 1001u}) {
      const auto a = random_vec(rng, n), b = random_vec(rng, n);
      double scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]) + std::abs(a[i] - b[i]);
      const double tol = 1e-14 * (1.0 + scale);
      CHECK(std::abs(t->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= tol);
      CHECK(std::abs(t->l1_distance(a.data(), b.data(), n) - ref.l1_distance(a.data(), b.data(), n)) <=
            tol);

      auto y1 = random_vec(rng, n);
      auto y2 = y1;
      t->axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      CHECK(bit_equal(y1, y2));

      auto b_tied = b;
      for (std::size_t i = 0; i < n; i += 3) b_tied[i] = a[i];
      std::vector<double> ga1(n, 0.5), gb1(n, -0.5), ga2 = ga1, gb2 = gb1;
      t->l1_sign_update(a.data(), b_tied.data(), 1.25, ga1.data(), gb1.data(), n);
      ref.l1_sign_update(a.data(), b_tied.data(), 1.25, ga2.data(), gb2.data(), n);
      CHECK(bit_equal(ga1, ga2));
      CHECK(bit_equal(gb1, gb2));
    }
  }
}

TEST_CASE("dispatch override and matrix ops under each ISA") {
  std::mt19937_64 rng(5);
  Matrix a(13, 11), b(11, 9), c(17, 11);
  for (Matrix* m : {&a, &b, &c})
    for (double& v : m->values()) v = std::uniform_real_distribution<double>(-1, 1)(rng);

  REQUIRE(kernels::set_kernel_isa(Isa::Scalar));
  CHECK(kernels::active().isa == Isa::Scalar);
  const Matrix mm_ref = matmul(a, b);
  const Matrix l1_ref = l1_row_distance(a, c);
  kernels::reset_kernel_isa();

  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (!kernels::set_kernel_isa(isa)) continue;
    CHECK(matmul(a, b) == mm_ref);  // axpy-based, bit-identical
    const Matrix l1 = l1_row_distance(a, c);
    for (std::size_t i = 0; i < l1.size(); ++i)
      CHECK(l1.values()[i] == doctest::Approx(l1_ref.values()[i]).epsilon(1e-14));
    kernels::reset_kernel_isa();
  }
  CHECK_FALSE(kernels::set_kernel_isa(static_cast<Isa>(99)));
}

TEST_CASE("matrix basics") {
  CHECK(l1_row_distance(Matrix::from_rows({{1, 2}}), Matrix::from_rows({{1, 2}, {0, 0}})) ==
        Matrix::from_rows({{0, 3}}));
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError);
  CHECK_THROWS_AS(Matrix(1, 2, std::vector<double>{1.0, NAN}), std::exception);
  CHECK_THROWS_AS(Matrix(1, 2, std::vector<double>{1.0}), std::exception);
  Matrix m = Matrix::from_rows({{3, 4}, {0, 0}});
  normalize_rows_l2(m);
  CHECK(m(0, 0) == doctest::Approx(0.6));
  CHECK(m(1, 1) == 0.0);
  CHECK(transpose(Matrix::from_rows({{1, 2, 3}})) == Matrix::from_rows({{1}, {2}, {3}}));

  // Threaded distance matches the single-threaded result exactly.
  std::mt19937_64 rng(9);
  Matrix a(130, 7), b(90, 7);
  for (Matrix* x : {&a, &b})
    for (double& v : x->values()) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  CHECK(l1_row_distance(a, b, 4) == l1_row_distance(a, b, 1));
}
