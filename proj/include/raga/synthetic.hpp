#pragma once

#include <cstdint>
#include <vector>

#include "raga/kg.hpp"
#include "raga/matrix.hpp"

namespace raga {

struct SyntheticParams {
  int n_entities = 300;
  int n_relations = 20;
  int n_triples = 1500;
  double edge_noise = 0.1;   // fraction of KG2 triples replaced
  double embed_noise = 0.5;  // std-dev of Gaussian noise on KG2 embeddings
  double seed_ratio = 0.3;
  int embed_dim = 16;
  std::uint64_t rng_seed = 1;
};

struct SyntheticPair {
  AlignmentTask task;
  Matrix embeddings1;  // n x embed_dim, standard normal
  Matrix embeddings2;  // row permutation[i] = embeddings1 row i + noise
  /// permutation[i] is the KG2 entity aligned with KG1 entity i.
  std::vector<int> permutation;
};

/// KG1 is random; KG2 is KG1 relabelled by a random permutation with
/// floor(edge_noise * n_triples) triples swapped for fresh random ones.
/// Deterministic in rng_seed. Throws std::invalid_argument on infeasible
/// parameters.
SyntheticPair generate_synthetic_pair(const SyntheticParams& p);

}  // namespace raga
