#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "raga/kg.hpp"
#include "raga/synthetic.hpp"

using namespace raga;
namespace fs = std::filesystem;

namespace {

fs::path write_tmp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("raga_test_kg_" + name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("load_graph: minimal two-node graph") {
  const KnowledgeGraph kg = load_graph(write_tmp("two.tsv", "a\tr1\tb\nb\tr1\ta\n"));
  CHECK(kg.entity_count() == 2);
  CHECK(kg.relation_count() == 1);
  CHECK(kg.triples().size() == 2);
  CHECK(kg.entities().name(0) == "a");
  CHECK(kg.entities().name(1) == "b");
}

TEST_CASE("load_graph: duplicates collapse, blank lines skipped, empty file valid") {
  CHECK(load_graph(write_tmp("dup.tsv", "a\tr\tb\n\na\tr\tb\n")).triples().size() == 1);
  const KnowledgeGraph empty = load_graph(write_tmp("empty.tsv", ""));
  CHECK(empty.entity_count() == 0);
  CHECK(empty.triples().empty());
}

TEST_CASE("load_graph: malformed line reports its number") {
  const fs::path p = write_tmp("bad.tsv", "a\tr\tb\nx\ty\n");
  try {
    load_graph(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find(p.string()) != std::string::npos);
  }
  CHECK_THROWS_AS(load_graph(fs::temp_directory_path() / "raga_no_such_file.tsv"), std::exception);
}

TEST_CASE("load_graph: id assignment is stable across loads") {
  const fs::path p = write_tmp("stable.tsv", "z\tq\ty\ny\tp\tx\nx\tq\tz\n");
  const KnowledgeGraph a = load_graph(p), b = load_graph(p);
  CHECK(a.entities().names() == b.entities().names());
  CHECK(a.relations().names() == b.relations().names());
  CHECK(a.triples() == b.triples());
  CHECK(a.entities().names() == std::vector<std::string>{"z", "y", "x"});
}

TEST_CASE("KnowledgeGraph rejects out-of-range indices") {
  CHECK_THROWS(KnowledgeGraph(2, 1, {{0, 0, 2}}));
  CHECK_THROWS(KnowledgeGraph(2, 1, {{0, 1, 1}}));
}

TEST_CASE("normalized adjacency: hand-computed cases") {
  const auto single = build_normalized_adjacency(KnowledgeGraph(1, 0, {}));
  CHECK(single.at(0, 0) == doctest::Approx(1.0));

  const auto pair = build_normalized_adjacency(KnowledgeGraph(2, 1, {{0, 0, 1}}));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(pair.at(i, j) == doctest::Approx(0.5).epsilon(1e-15));

  const auto path = build_normalized_adjacency(KnowledgeGraph(3, 1, {{0, 0, 1}, {1, 0, 2}}));
  CHECK(path.at(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(path.at(0, 1) == doctest::Approx(0.40825).epsilon(1e-5));
  CHECK(path.at(0, 2) == 0.0);
}

TEST_CASE("normalized adjacency matches a dense brute-force construction") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 50);
    const int m = 1 + static_cast<int>(rng() % 4);
    const int t = static_cast<int>(rng() % (3 * n + 1));
    const KnowledgeGraph kg = oracle::random_graph(rng, n, m, t, /*self_loops=*/true);
    const NormalizedAdjacency adj = build_normalized_adjacency(kg);
    const oracle::Dense ref = oracle::normalized_adjacency(kg);
    for (int i = 0; i < n; ++i) {
      CHECK(adj.at(i, i) > 0.0);
      for (int j = 0; j < n; ++j) {
        REQUIRE(std::abs(adj.at(i, j) - ref[i][j]) < 1e-14);
        CHECK(adj.at(i, j) == adj.at(j, i));
      }
    }
  }
}

TEST_CASE("incidence index: examples") {
  const auto one = build_incidence_index(KnowledgeGraph(2, 1, {{0, 0, 1}}));
  CHECK(one.heads_of_relation[0] == std::vector<int>{0});
  CHECK(one.tails_given_head_relation.at({0, 0}) == std::vector<int>{1});
  CHECK(one.neighbors[0] == std::vector<int>{1});
  CHECK(one.neighbors[1] == std::vector<int>{0});

  const auto multi = build_incidence_index(KnowledgeGraph(2, 2, {{0, 0, 1}, {0, 1, 1}}));
  CHECK(multi.relations_between.at({0, 1}) == std::vector<int>{0, 1});

  // Three relations between one person and one country.
  const auto three =
      build_incidence_index(KnowledgeGraph(2, 3, {{0, 0, 1}, {0, 1, 1}, {0, 2, 1}}));
  CHECK(three.relations_between.at({0, 1}).size() == 3);
  CHECK(three.tails_of_head[0] == std::vector<int>{1});
  CHECK(three.heads_of_tail[1] == std::vector<int>{0});
}

TEST_CASE("incidence index: reconstruction and projections over random graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 30);
    const int m = 1 + static_cast<int>(rng() % 5);
    const KnowledgeGraph kg = oracle::random_graph(rng, n, m, static_cast<int>(rng() % 80), true);
    const RelationIncidenceIndex idx = build_incidence_index(kg);
    std::vector<Triple> expected = kg.triples();
    std::sort(expected.begin(), expected.end());
    REQUIRE(idx.reconstruct_triples() == expected);

    std::set<std::pair<int, int>> pairs;
    for (const Triple& t : kg.triples()) pairs.insert({t.head, t.tail});
    std::size_t rb = 0;
    for (const auto& [p, rels] : idx.relations_between) {
      CHECK(pairs.count(p) == 1);
      CHECK(std::is_sorted(rels.begin(), rels.end()));
      rb += rels.size();
    }
    CHECK(rb == kg.triples().size());
    for (int i = 0; i < n; ++i) {
      std::set<int> tails, heads, nb;
      for (const Triple& t : kg.triples()) {
        if (t.head == i) tails.insert(t.tail);
        if (t.tail == i) heads.insert(t.head);
        if (t.head == i && t.tail != i) nb.insert(t.tail);
        if (t.tail == i && t.head != i) nb.insert(t.head);
      }
      CHECK(idx.tails_of_head[i] == std::vector<int>(tails.begin(), tails.end()));
      CHECK(idx.heads_of_tail[i] == std::vector<int>(heads.begin(), heads.end()));
      CHECK(idx.neighbors[i] == std::vector<int>(nb.begin(), nb.end()));
    }
  }
}

TEST_CASE("synthetic generator: counts, noiseless clone, determinism") {
  SyntheticParams p;
  const SyntheticPair a = generate_synthetic_pair(p);
  CHECK(a.task.seeds.size() == 90);
  CHECK(a.task.tests.size() == 210);
  CHECK(a.task.kg1.triples().size() == 1500);
  CHECK(a.task.kg2.triples().size() == 1500);
  CHECK_NOTHROW(a.task.validate());

  const SyntheticPair b = generate_synthetic_pair(p);
  CHECK(a.task.kg1.triples() == b.task.kg1.triples());
  CHECK(a.task.kg2.triples() == b.task.kg2.triples());
  CHECK(a.task.seeds == b.task.seeds);
  CHECK(a.embeddings1 == b.embeddings1);
  CHECK(a.embeddings2 == b.embeddings2);

  // Exactly floor(0.1 * 1500) triples replaced.
  std::set<Triple> mapped;
  for (const Triple& t : a.task.kg1.triples())
    mapped.insert({a.permutation[t.head], t.relation, a.permutation[t.tail]});
  std::size_t kept = 0;
  for (const Triple& t : a.task.kg2.triples()) kept += mapped.count(t);
  CHECK(kept == 1500 - 150);

  p.edge_noise = 0.0;
  p.embed_noise = 0.0;
  const SyntheticPair c = generate_synthetic_pair(p);
  std::set<Triple> kg2(c.task.kg2.triples().begin(), c.task.kg2.triples().end());
  for (const Triple& t : c.task.kg1.triples())
    CHECK(kg2.count({c.permutation[t.head], t.relation, c.permutation[t.tail]}) == 1);
  CHECK(kg2.size() == c.task.kg1.triples().size());
  for (std::size_t i = 0; i < c.permutation.size(); ++i)
    for (std::size_t d = 0; d < c.embeddings1.cols(); ++d)
      REQUIRE(c.embeddings1(i, d) == c.embeddings2(static_cast<std::size_t>(c.permutation[i]), d));
}

TEST_CASE("synthetic generator: infeasible parameters") {
  SyntheticParams p;
  p.n_entities = 3;
  p.n_triples = 10;
  CHECK_THROWS_AS(generate_synthetic_pair(p), std::invalid_argument);
  p = {};
  p.edge_noise = 1.0;
  CHECK_THROWS_AS(generate_synthetic_pair(p), std::invalid_argument);
  p = {};
  p.seed_ratio = 0.0;
  CHECK_THROWS_AS(generate_synthetic_pair(p), std::invalid_argument);
}
