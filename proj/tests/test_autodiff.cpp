#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "raga/autodiff.hpp"
#include "raga/gradcheck.hpp"

using namespace raga;

namespace {

// Entries bounded away from zero so relu / |x| kinks are not crossed by the
// finite-difference step.
Matrix away_from_zero(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> mag(0.1, 1.5);
  std::bernoulli_distribution neg(0.5);
  Matrix m(r, c);
  for (double& v : m.values()) v = neg(rng) ? -mag(rng) : mag(rng);
  return m;
}

// Reduces any value to a scalar with fixed random weights, so every output
// entry gets a distinct adjoint.
ad::Var project(ad::Var v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ad::sum(ad::mul(v, v.tape->constant(oracle::random_matrix(rng, v.rows(), v.cols()))));
}

void require_pass(const GradCheckReport& r) {
  INFO("max rel " << r.max_relative_error << ", max abs " << r.max_absolute_error << ", failures "
                  << r.failures << "/" << r.entries);
  CHECK(r.passed);
  CHECK(r.entries > 0);
}

}  // namespace

TEST_CASE("forward examples") {
  ad::Tape t;
  CHECK(ad::row_softmax(t.constant(Matrix::from_rows({{0, 0}}))).value() ==
        Matrix::from_rows({{0.5, 0.5}}));
  CHECK(ad::leaky_relu(t.constant(Matrix::from_rows({{-1}})), 0.2).value()(0, 0) ==
        doctest::Approx(-0.2));
  CHECK(ad::l1_row_distance(t.constant(Matrix::from_rows({{1, 2}})),
                            t.constant(Matrix::from_rows({{1, 2}, {0, 0}})))
            .value() == Matrix::from_rows({{0, 3}}));
  CHECK_THROWS_AS(ad::matmul(t.constant(Matrix(2, 3)), t.constant(Matrix(2, 3))), DimensionError);
}

TEST_CASE("backward examples") {
  Parameter w(Matrix::from_rows({{1, 2}, {3, 4}}));
  {
    ad::Tape t;
    t.backward(ad::sum(t.parameter(w)));
    CHECK(w.gradient == Matrix(2, 2, 1.0));
  }
  Parameter z(Matrix(1, 1, 0.0));
  {
    ad::Tape t;
    t.backward(ad::sum(ad::sigmoid(t.parameter(z))));
    CHECK(z.gradient(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  }
  {
    ad::Tape t;
    CHECK_THROWS_AS(t.backward(t.parameter(w)), ad::ContractError);
  }
  // Gradients are reset at the start of each backward pass.
  {
    ad::Tape t;
    t.backward(ad::sum(t.parameter(w)));
    t.backward(ad::sum(t.parameter(w)));
    CHECK(w.gradient == Matrix(2, 2, 1.0));
  }
}

TEST_CASE("subgradient convention at kinks") {
  Parameter p(Matrix::from_rows({{0.0}}));
  ad::Tape t1;
  t1.backward(ad::sum(ad::relu(t1.parameter(p))));
  CHECK(p.gradient(0, 0) == 1.0);
  ad::Tape t2;
  t2.backward(ad::sum(ad::leaky_relu(t2.parameter(p), 0.2)));
  CHECK(p.gradient(0, 0) == 1.0);
  ad::Tape t3;
  t3.backward(ad::sum(ad::l1_row_distance(t3.parameter(p), t3.constant(Matrix(1, 1)))));
  CHECK(p.gradient(0, 0) == 0.0);
  // Hinge argument exactly 0 counts as active.
  Parameter pos(Matrix::from_rows({{1.0}}));
  ad::Tape t4;
  t4.backward(ad::hinge_loss(t4.parameter(pos), t4.constant(Matrix::from_rows({{4.0}})),
                             ad::make_index({0}), 3.0));
  CHECK(pos.gradient(0, 0) == 1.0);
}

TEST_CASE("row_softmax properties") {
  std::mt19937_64 rng(1);
  const Matrix x = oracle::random_matrix(rng, 5, 7, -30, 30);
  Matrix shifted = x;
  for (std::size_t j = 0; j < 7; ++j) shifted(2, j) += 123.0;
  ad::Tape t;
  const Matrix a = ad::row_softmax(t.constant(x)).value();
  const Matrix b = ad::row_softmax(t.constant(shifted)).value();
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 7; ++j) {
      s += a(i, j);
      CHECK(a(i, j) == doctest::Approx(b(i, j)).epsilon(1e-12));
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("finite-difference check on every operation") {
  std::mt19937_64 rng(2024);
  Parameter a(away_from_zero(rng, 4, 3));
  Parameter b(away_from_zero(rng, 3, 5));
  Parameter c(away_from_zero(rng, 4, 3));
  Parameter bias(away_from_zero(rng, 1, 3));
  Parameter col(away_from_zero(rng, 6, 1));

  const NormalizedAdjacency adj =
      build_normalized_adjacency(KnowledgeGraph(4, 1, {{0, 0, 1}, {1, 0, 2}, {3, 0, 0}}));
  const auto seg = ad::make_index({0, 0, 2, 2, 2, 1});
  const auto val_idx = ad::make_index({3, 1, 0, 2, 2, 1});

  struct Case {
    const char* name;
    Parameter* p;
    ScalarComputation f;
  };
  const std::vector<Case> cases = {
      {"matmul lhs", &a, [&](ad::Tape& t) { return project(ad::matmul(t.parameter(a), t.parameter(b)), 1); }},
      {"matmul rhs", &b, [&](ad::Tape& t) { return project(ad::matmul(t.parameter(a), t.parameter(b)), 1); }},
      {"add", &a, [&](ad::Tape& t) { return project(ad::add(t.parameter(a), t.parameter(c)), 2); }},
      {"sub", &c, [&](ad::Tape& t) { return project(ad::sub(t.parameter(a), t.parameter(c)), 3); }},
      {"mul", &a, [&](ad::Tape& t) { return project(ad::mul(t.parameter(a), t.parameter(c)), 4); }},
      {"mul self", &a, [&](ad::Tape& t) { return project(ad::mul(t.parameter(a), t.parameter(a)), 4); }},
      {"add_row value", &a, [&](ad::Tape& t) { return project(ad::add_row(t.parameter(a), t.parameter(bias)), 5); }},
      {"add_row bias", &bias, [&](ad::Tape& t) { return project(ad::add_row(t.parameter(a), t.parameter(bias)), 5); }},
      {"affine", &a, [&](ad::Tape& t) { return project(ad::affine(t.parameter(a), -1.5, 2.0), 6); }},
      {"concat", &c, [&](ad::Tape& t) { return project(ad::concat_cols({t.parameter(a), t.parameter(c), t.parameter(a)}), 7); }},
      {"slice", &col, [&](ad::Tape& t) { return project(ad::slice_rows(t.parameter(col), 2, 5), 8); }},
      {"relu", &a, [&](ad::Tape& t) { return project(ad::relu(t.parameter(a)), 9); }},
      {"leaky_relu", &a, [&](ad::Tape& t) { return project(ad::leaky_relu(t.parameter(a), 0.2), 10); }},
      {"sigmoid", &a, [&](ad::Tape& t) { return project(ad::sigmoid(t.parameter(a)), 11); }},
      {"row_softmax", &b, [&](ad::Tape& t) { return project(ad::row_softmax(t.parameter(b)), 12); }},
      {"spmm", &a, [&](ad::Tape& t) { return project(ad::spmm(adj, t.parameter(a)), 13); }},
      {"gather", &a, [&](ad::Tape& t) { return project(ad::gather_rows(t.parameter(a), val_idx), 14); }},
      {"segment_softmax", &col, [&](ad::Tape& t) { return project(ad::segment_softmax(t.parameter(col), seg, 3), 15); }},
      {"segment_weighted_sum values", &a,
       [&](ad::Tape& t) {
         return project(ad::segment_weighted_sum(t.parameter(a), val_idx, t.parameter(col), seg, 4), 16);
       }},
      {"segment_weighted_sum weights", &col,
       [&](ad::Tape& t) {
         return project(ad::segment_weighted_sum(t.parameter(a), val_idx, t.parameter(col), seg, 4), 16);
       }},
      {"l1_row_distance", &a, [&](ad::Tape& t) { return project(ad::l1_row_distance(t.parameter(a), t.parameter(c)), 17); }},
      {"pair_l1", &c,
       [&](ad::Tape& t) {
         return project(ad::pair_l1(t.parameter(a), t.parameter(c), ad::make_index({0, 1, 3}),
                                    ad::make_index({2, 1, 0})),
                        18);
       }},
      {"hinge", &col,
       [&](ad::Tape& t) {
         const ad::Var v = t.parameter(col);
         return ad::hinge_loss(ad::slice_rows(v, 0, 2), ad::slice_rows(v, 2, 6),
                               ad::make_index({0, 0, 1, 1}), 1.0);
       }},
  };
  for (const Case& k : cases) {
    SUBCASE(k.name) { require_pass(finite_difference_check(k.f, *k.p)); }
  }
}

TEST_CASE("finite_difference_check contract") {
  Parameter w(Matrix::from_rows({{1.0, -2.0}, {0.5, 3.0}}));
  const auto linear = [&](ad::Tape& t) { return project(t.parameter(w), 99); };
  const GradCheckReport r = finite_difference_check(linear, w);
  CHECK(r.passed);
  CHECK(r.max_relative_error < 1e-10);

  CHECK_THROWS_AS(finite_difference_check([&](ad::Tape& t) { return t.parameter(w); }, w),
                  CheckInvalid);
  int calls = 0;
  const auto flaky = [&](ad::Tape& t) {
    ++calls;
    return ad::affine(ad::sum(t.parameter(w)), 1.0, static_cast<double>(calls));
  };
  CHECK_THROWS_AS(finite_difference_check(flaky, w), CheckInvalid);

  // A wrong gradient is caught: the tape differentiates x, but the value is x^2.
  const auto wrong = [&](ad::Tape& t) {
    const ad::Var x = t.parameter(w);
    Matrix sq = x.value();
    for (double& v : sq.values()) v = v * v;
    return ad::sum(t.record(sq, {x}, [x](ad::Tape& tape, std::size_t self) {
      const Matrix& g = tape.grad(self);
      Matrix& gx = tape.grad(x.id);
      for (std::size_t i = 0; i < gx.size(); ++i) gx.values()[i] += g.values()[i];
    }));
  };
  CHECK_FALSE(finite_difference_check(wrong, w).passed);
}
