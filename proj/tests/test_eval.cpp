#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "raga/autodiff.hpp"
#include "raga/eval.hpp"

using namespace raga;

TEST_CASE("rank metrics: hand cases") {
  Matrix diag(5, 5, -1.0);
  for (std::size_t i = 0; i < 5; ++i) diag(i, i) = 0.0;
  const MetricsReport p = rank_metrics(diag, {{0, 0}, {3, 3}});
  CHECK(p.hits_at.at(1) == 1.0);
  CHECK(*p.mrr == 1.0);

  Matrix s(1, 10, 0.0);
  s(0, 4) = 2.0;
  s(0, 7) = 1.0;
  const MetricsReport r = rank_metrics(s, {{0, 7}});
  CHECK(r.hits_at.at(1) == 0.0);
  CHECK(r.hits_at.at(10) == 1.0);
  CHECK(*r.mrr == 0.5);

  // Ties: a rival with a lower index ranks ahead, one with a higher index does not.
  const Matrix t = Matrix::from_rows({{1, 1, 1}});
  CHECK(*rank_metrics(t, {{0, 0}}).mrr == 1.0);
  CHECK(*rank_metrics(t, {{0, 2}}).mrr == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_AS(rank_metrics(t, {{1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(rank_metrics(t, {{0, 0}}, {0}), std::invalid_argument);
}

TEST_CASE("rank metrics agree with a naive full sort and obey bounds") {
  std::mt19937_64 rng(1);
  const std::vector<int> ks = {1, 3, 10, 50};
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n1 = 5 + rng() % 30, n2 = 5 + rng() % 30;
    Matrix s = oracle::random_matrix(rng, n1, n2);
    if (trial % 2) for (double& v : s.values()) v = std::round(v * 4.0);
    std::vector<EntityPair> tests;
    for (std::size_t i = 0; i < n1; i += 2) tests.push_back({static_cast<int>(i), static_cast<int>(rng() % n2)});
    const MetricsReport m = rank_metrics(s, tests, ks);
    const oracle::NaiveMetrics ref = oracle::naive_rank_metrics(s, tests, ks);
    for (std::size_t q = 0; q < ks.size(); ++q) CHECK(m.hits_at.at(ks[q]) == doctest::Approx(ref.hits[q]));
    CHECK(*m.mrr == doctest::Approx(ref.mrr));
    CHECK(m.hits_at.at(1) <= *m.mrr);
    CHECK(*m.mrr <= 1.0);
    for (std::size_t q = 1; q < ks.size(); ++q) CHECK(m.hits_at.at(ks[q - 1]) <= m.hits_at.at(ks[q]));
    const MetricsReport all = rank_metrics(s, tests, {static_cast<int>(n2)});
    CHECK(all.hits_at.at(static_cast<int>(n2)) == 1.0);

    // Strictly increasing transforms of S leave the metrics unchanged.
    Matrix e = s;
    for (double& v : e.values()) v = std::exp(3.0 * v) - 7.0;
    const MetricsReport me = rank_metrics(e, tests, ks);
    CHECK(me.hits_at == m.hits_at);
    CHECK(*me.mrr == *m.mrr);
  }
}

TEST_CASE("global metrics") {
  Alignment a;
  a.method = MatchMethod::Daa;
  a.target_of = {2, 0, 1, -1};
  CHECK(*global_metrics(a, {{0, 2}, {1, 0}, {2, 1}}).one_to_one_h1 == 1.0);
  CHECK(*global_metrics(a, {{0, 1}, {1, 2}}).one_to_one_h1 == 0.0);
  CHECK(*global_metrics(a, {{3, 3}, {0, 2}}).one_to_one_h1 == 0.5);  // unmatched is a miss
  a.target_of = {1, 1, 0, -1};
  CHECK_THROWS_AS(global_metrics(a, {{0, 1}}), ad::ContractError);
}

TEST_CASE("report formats") {
  MetricsReport r;
  r.test_pairs = 4;
  r.hits_at = {{1, 0.5}, {10, 0.75}};
  r.mrr = 0.625;
  r.one_to_one_h1 = 0.5;
  r.conflict_count = 0;
  const std::string kv = r.to_key_values();
  CHECK(kv.find("hits@1=0.5\n") != std::string::npos);
  CHECK(kv.find("hits@10=0.75\n") != std::string::npos);
  CHECK(kv.find("mrr=0.625\n") != std::string::npos);
  CHECK(kv.find("one_to_one_h1=0.5\n") != std::string::npos);
  CHECK(kv.find("direction=kg1->kg2\n") != std::string::npos);
  const std::string table = r.to_table();
  CHECK(table.find("H@10") != std::string::npos);
  CHECK(table.find("75.00%") != std::string::npos);
}
