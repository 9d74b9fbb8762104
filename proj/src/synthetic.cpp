#include "raga/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace raga {
namespace {

Triple random_triple(std::mt19937_64& rng, int n, int m) {
  std::uniform_int_distribution<int> ent(0, n - 1);
  std::uniform_int_distribution<int> rel(0, m - 1);
  Triple t;
  do {
    t = {ent(rng), rel(rng), ent(rng)};
  } while (t.head == t.tail);
  return t;
}

IdMap prefixed(const char* prefix, int count) {
  IdMap ids;
  for (int i = 0; i < count; ++i) ids.intern(prefix + std::to_string(i));
  return ids;
}

}  // namespace

SyntheticPair generate_synthetic_pair(const SyntheticParams& p) {
  const long long n = p.n_entities;
  if (p.n_entities < 2 || p.n_relations < 1 || p.n_triples < 0 || p.embed_dim < 1) {
    throw std::invalid_argument("generate_synthetic_pair: counts must be positive");
  }
  // Self-loops are never generated, so the usable triple space is n(n-1)m.
  if (static_cast<long long>(p.n_triples) > n * n ||
      static_cast<long long>(p.n_triples) > n * (n - 1) * p.n_relations) {
    throw std::invalid_argument("generate_synthetic_pair: too many triples for the entity count");
  }
  if (!(p.edge_noise >= 0.0 && p.edge_noise < 1.0)) {
    throw std::invalid_argument("generate_synthetic_pair: edge_noise must be in [0, 1)");
  }
  if (!(p.seed_ratio > 0.0 && p.seed_ratio < 1.0)) {
    throw std::invalid_argument("generate_synthetic_pair: seed_ratio must be in (0, 1)");
  }
  if (!(p.embed_noise >= 0.0) || !std::isfinite(p.embed_noise)) {
    throw std::invalid_argument("generate_synthetic_pair: embed_noise must be >= 0");
  }

  std::mt19937_64 rng(p.rng_seed);
  const int N = p.n_entities;
  const int M = p.n_relations;

  std::set<Triple> kg1_set;
  std::vector<Triple> kg1_triples;
  while (static_cast<int>(kg1_triples.size()) < p.n_triples) {
    const Triple t = random_triple(rng, N, M);
    if (kg1_set.insert(t).second) kg1_triples.push_back(t);
  }

  std::vector<int> perm(static_cast<std::size_t>(N));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Triple> kg2_triples;
  kg2_triples.reserve(kg1_triples.size());
  for (const Triple& t : kg1_triples) kg2_triples.push_back({perm[t.head], t.relation, perm[t.tail]});

  const auto swaps = static_cast<std::size_t>(std::floor(p.edge_noise * p.n_triples));
  if (swaps > 0) {
    std::shuffle(kg2_triples.begin(), kg2_triples.end(), rng);
    std::set<Triple> removed(kg2_triples.end() - static_cast<std::ptrdiff_t>(swaps),
                             kg2_triples.end());
    kg2_triples.resize(kg2_triples.size() - swaps);
    std::set<Triple> present(kg2_triples.begin(), kg2_triples.end());
    std::size_t added = 0;
    while (added < swaps) {
      const Triple t = random_triple(rng, N, M);
      if (present.count(t) != 0 || removed.count(t) != 0) continue;
      present.insert(t);
      kg2_triples.push_back(t);
      ++added;
    }
    // Restore an order independent of the shuffle above.
    std::sort(kg2_triples.begin(), kg2_triples.end());
  }

  SyntheticPair out;
  out.permutation = perm;
  out.task.kg1 = KnowledgeGraph(prefixed("a", N), prefixed("r", M), std::move(kg1_triples));
  out.task.kg2 = KnowledgeGraph(prefixed("b", N), prefixed("r", M), std::move(kg2_triples));

  std::vector<int> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_seed = static_cast<std::size_t>(std::llround(p.seed_ratio * N));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const EntityPair pair{order[i], perm[static_cast<std::size_t>(order[i])]};
    (i < n_seed ? out.task.seeds : out.task.tests).push_back(pair);
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  out.embeddings1 = Matrix(static_cast<std::size_t>(N), static_cast<std::size_t>(p.embed_dim));
  for (double& v : out.embeddings1.values()) v = gauss(rng);
  out.embeddings2 = Matrix(static_cast<std::size_t>(N), static_cast<std::size_t>(p.embed_dim));
  for (int i = 0; i < N; ++i) {
    auto src = out.embeddings1.row(static_cast<std::size_t>(i));
    auto dst = out.embeddings2.row(static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]));
    for (std::size_t d = 0; d < src.size(); ++d) {
      const double noise = gauss(rng);
      dst[d] = src[d] + p.embed_noise * noise;
    }
  }
  return out;
}

}  // namespace raga
