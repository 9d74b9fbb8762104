#pragma once

#include <vector>

#include "raga/aligner.hpp"
#include "raga/config.hpp"
#include "raga/eval.hpp"
#include "raga/io.hpp"
#include "raga/kg.hpp"
#include "raga/matrix.hpp"
#include "raga/synthetic.hpp"
#include "raga/trainer.hpp"

namespace raga {

struct LoadedTask {
  AlignmentTask task;
  Matrix embeddings1;
  Matrix embeddings2;
};

/// Reads triples, embeddings and pair files named in the config.
LoadedTask load_task(const RunConfig& config);

/// Fills d_e from the embedding width when it is 0; rejects a mismatch.
HyperParams resolve_hyper(HyperParams hyper, std::size_t embedding_dim);

struct AlignOutcome {
  SimilarityMatrix raw;
  Alignment alignment;
  /// Rank metrics on the raw similarity plus the matcher's own result:
  /// conflict_count for local, one_to_one_h1 for daa / hungarian.
  MetricsReport report;
};

/// Builds S, optionally S^g, runs the matcher and evaluates on task.tests.
AlignOutcome align_and_evaluate(const Matrix& x1, const Matrix& x2,
                                const std::vector<EntityPair>& tests, MatchMethod matcher,
                                bool no_fine_grained, int threads = 1);

struct SweepRow {
  double seed_ratio = 0.0;
  MetricsReport report;
};

/// For each ratio: generate the synthetic pair with that seed ratio, train,
/// align with the configured matcher, evaluate.
std::vector<SweepRow> synthetic_sweep(const RunConfig& config, const std::vector<double>& ratios);

}  // namespace raga
