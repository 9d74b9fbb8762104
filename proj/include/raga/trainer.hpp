#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "raga/autodiff.hpp"
#include "raga/encoder.hpp"
#include "raga/kg.hpp"
#include "raga/matrix.hpp"

namespace raga {

/// Loss became NaN or infinite.
class TrainingDiverged : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Corrupted pairs for every seed. Entries [p * per_pair, (p + 1) * per_pair)
/// belong to seed p: first the KG2-side corruptions (e_i, e_j'), then the
/// KG1-side ones (e_i', e_j).
struct NegativeCache {
  std::vector<int> source;
  std::vector<int> target;
  std::vector<int> owner;
  std::size_t per_pair = 0;
  bool truncated = false;  // fewer than k candidates existed on some side

  std::size_t size() const noexcept { return source.size(); }
};

/// For seed (e_i, e_j): the k KG2 entities nearest to x1[e_i] (L1, excluding
/// e_j) and the k KG1 entities nearest to x2[e_j] (excluding e_i). Equal
/// distances resolve to the lower index.
NegativeCache sample_negatives(const Matrix& x1_out, const Matrix& x2_out,
                               const std::vector<EntityPair>& seeds, int k, int threads = 1);

/// sum over seeds and their cached negatives of
/// max(dis(e_i, e_j) - dis(e_i', e_j') + margin, 0).
ad::Var hinge_loss(ad::Var x1_out, ad::Var x2_out, const std::vector<EntityPair>& seeds,
                   const NegativeCache& negatives, double margin);

/// Adam with bias correction.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;

  void update(const std::vector<Parameter*>& params);
};

struct ModelParams {
  EncoderWeights weights;
  Parameter embeddings1;
  Parameter embeddings2;

  std::vector<Parameter*> parameters();
};

struct TrainState {
  HyperParams hyper;
  Ablation ablation;
  std::uint64_t rng_seed = 0;
  int epoch = 0;
  std::vector<double> loss_history;
  ModelParams params;
  AdamState optimizer;
  NegativeCache negatives;
  std::mt19937_64 rng;
};

/// Fresh state: row-normalised copies of the input embeddings and freshly
/// initialised encoder weights drawn from `rng_seed`.
TrainState init_train_state(const Matrix& embeddings1, const Matrix& embeddings2,
                            const HyperParams& hyper, const Ablation& ablation,
                            std::uint64_t rng_seed);

/// Full-batch training over a fixed task. Holds the prepared graph
/// structures, so the task must outlive it.
class Trainer {
public:
  Trainer(const AlignmentTask& task, TrainState state, int threads = 1);

  /// One epoch: refresh negatives when epoch % neg_refresh == 0, forward both
  /// graphs, hinge loss, backward, Adam step. Returns the loss.
  double step();
  /// Runs until state().epoch == hyper.epochs.
  void run();

  const TrainState& state() const noexcept { return state_; }
  TrainState& state() noexcept { return state_; }
  const GraphStructure& graph1() const noexcept { return g1_; }
  const GraphStructure& graph2() const noexcept { return g2_; }

  /// Final entity representations under the current parameters.
  std::pair<Matrix, Matrix> embed();

private:
  const AlignmentTask& task_;
  GraphStructure g1_;
  GraphStructure g2_;
  TrainState state_;
  int threads_;
};

/// init_train_state + Trainer::run.
TrainState train(const AlignmentTask& task, const Matrix& embeddings1, const Matrix& embeddings2,
                 const HyperParams& hyper, const Ablation& ablation, std::uint64_t rng_seed,
                 int threads = 1);

}  // namespace raga
