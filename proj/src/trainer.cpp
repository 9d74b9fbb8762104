#include "raga/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <thread>

#include "raga/kernels.hpp"

namespace raga {
namespace {

// Indices of the `k` rows of `pool` nearest to `query`, skipping `exclude`.
void nearest(const double* query, const Matrix& pool, int exclude, std::size_t k,
             std::vector<std::pair<double, int>>& scratch, int* out) {
  const auto& kern = kernels::active();
  scratch.clear();
  for (std::size_t j = 0; j < pool.rows(); ++j) {
    if (static_cast<int>(j) == exclude) continue;
    scratch.emplace_back(kern.l1_distance(query, pool.row(j).data(), pool.cols()),
                         static_cast<int>(j));
  }
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k),
                    scratch.end());
  for (std::size_t q = 0; q < k; ++q) out[q] = scratch[q].second;
}

}  // namespace

NegativeCache sample_negatives(const Matrix& x1_out, const Matrix& x2_out,
                               const std::vector<EntityPair>& seeds, int k, int threads) {
  require_shape(x1_out.cols() == x2_out.cols(), "sample_negatives", x1_out, x2_out);
  if (k < 0) throw std::invalid_argument("sample_negatives: k must be non-negative");
  const auto want = static_cast<std::size_t>(k);
  const std::size_t k2 = std::min(want, x2_out.rows() > 0 ? x2_out.rows() - 1 : 0);
  const std::size_t k1 = std::min(want, x1_out.rows() > 0 ? x1_out.rows() - 1 : 0);

  NegativeCache cache;
  cache.per_pair = k1 + k2;
  cache.truncated = k1 < want || k2 < want;
  const std::size_t total = seeds.size() * cache.per_pair;
  cache.source.assign(total, 0);
  cache.target.assign(total, 0);
  cache.owner.assign(total, 0);

  auto work = [&](std::size_t lo, std::size_t hi) {
    std::vector<std::pair<double, int>> scratch;
    std::vector<int> picked(std::max(k1, k2));
    for (std::size_t p = lo; p < hi; ++p) {
      const EntityPair s = seeds[p];
      const std::size_t base = p * cache.per_pair;
      nearest(x1_out.row(static_cast<std::size_t>(s.source)).data(), x2_out, s.target, k2, scratch,
              picked.data());
      for (std::size_t q = 0; q < k2; ++q) {
        cache.source[base + q] = s.source;
        cache.target[base + q] = picked[q];
        cache.owner[base + q] = static_cast<int>(p);
      }
      nearest(x2_out.row(static_cast<std::size_t>(s.target)).data(), x1_out, s.source, k1, scratch,
              picked.data());
      for (std::size_t q = 0; q < k1; ++q) {
        cache.source[base + k2 + q] = picked[q];
        cache.target[base + k2 + q] = s.target;
        cache.owner[base + k2 + q] = static_cast<int>(p);
      }
    }
  };

  const std::size_t n_threads = static_cast<std::size_t>(std::max(threads, 1));
  if (n_threads == 1 || seeds.size() < 32) {
    work(0, seeds.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (seeds.size() + n_threads - 1) / n_threads;
    for (std::size_t lo = 0; lo < seeds.size(); lo += chunk)
      pool.emplace_back(work, lo, std::min(seeds.size(), lo + chunk));
    for (auto& t : pool) t.join();
  }
  return cache;
}

ad::Var hinge_loss(ad::Var x1_out, ad::Var x2_out, const std::vector<EntityPair>& seeds,
                   const NegativeCache& negatives, double margin) {
  std::vector<int> ps, pt;
  ps.reserve(seeds.size());
  pt.reserve(seeds.size());
  for (const EntityPair& s : seeds) {
    ps.push_back(s.source);
    pt.push_back(s.target);
  }
  const ad::Var pos = ad::pair_l1(x1_out, x2_out, ad::make_index(std::move(ps)),
                                  ad::make_index(std::move(pt)));
  const ad::Var neg = ad::pair_l1(x1_out, x2_out, ad::make_index(negatives.source),
                                  ad::make_index(negatives.target));
  return ad::hinge_loss(pos, neg, ad::make_index(negatives.owner), margin);
}

void AdamState::update(const std::vector<Parameter*>& params) {
  if (first_moment.empty()) {
    for (const Parameter* p : params) {
      first_moment.emplace_back(p->value.rows(), p->value.cols());
      second_moment.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (first_moment.size() != params.size()) {
    throw std::logic_error("AdamState: parameter list changed between steps");
  }
  ++step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->value.values();
    auto g = params[i]->gradient.values();
    auto m = first_moment[i].values();
    auto v = second_moment[i].values();
    for (std::size_t q = 0; q < w.size(); ++q) {
      m[q] = beta1 * m[q] + (1.0 - beta1) * g[q];
      v[q] = beta2 * v[q] + (1.0 - beta2) * g[q] * g[q];
      const double mhat = m[q] / c1;
      const double vhat = v[q] / c2;
      w[q] -= learning_rate * mhat / (std::sqrt(vhat) + epsilon);
    }
  }
}

std::vector<Parameter*> ModelParams::parameters() {
  std::vector<Parameter*> out{&embeddings1, &embeddings2};
  for (Parameter* p : weights.parameters()) out.push_back(p);
  return out;
}

TrainState init_train_state(const Matrix& embeddings1, const Matrix& embeddings2,
                            const HyperParams& hyper, const Ablation& ablation,
                            std::uint64_t rng_seed) {
  hyper.validate();
  const auto de = static_cast<std::size_t>(hyper.d_e);
  if (embeddings1.cols() != de || embeddings2.cols() != de) {
    throw DimensionError("init_train_state: embedding widths " + shape_string(embeddings1) +
                         " / " + shape_string(embeddings2) + " do not match d_e = " +
                         std::to_string(hyper.d_e));
  }
  TrainState s;
  s.hyper = hyper;
  s.ablation = ablation;
  s.rng_seed = rng_seed;
  s.rng.seed(rng_seed);
  s.params.weights = init_encoder_weights(hyper, s.rng);
  Matrix e1 = embeddings1;
  Matrix e2 = embeddings2;
  normalize_rows_l2(e1);
  normalize_rows_l2(e2);
  s.params.embeddings1 = Parameter(std::move(e1));
  s.params.embeddings2 = Parameter(std::move(e2));
  s.optimizer.learning_rate = hyper.learning_rate;
  return s;
}

Trainer::Trainer(const AlignmentTask& task, TrainState state, int threads)
    : task_(task),
      g1_(prepare_graph(task.kg1)),
      g2_(prepare_graph(task.kg2)),
      state_(std::move(state)),
      threads_(threads) {
  task_.validate();
  if (task_.seeds.empty()) throw std::invalid_argument("train: no seed pairs");
  if (state_.params.embeddings1.value.rows() != g1_.n_entities ||
      state_.params.embeddings2.value.rows() != g2_.n_entities) {
    throw DimensionError("train: embedding rows do not match entity counts (" +
                         std::to_string(g1_.n_entities) + ", " + std::to_string(g2_.n_entities) +
                         ")");
  }
}

double Trainer::step() {
  TrainState& s = state_;
  ad::Tape tape;
  const ad::Var e1 = tape.parameter(s.params.embeddings1);
  const ad::Var e2 = tape.parameter(s.params.embeddings2);
  const ad::Var x1 = encode(tape, g1_, e1, s.params.weights, s.hyper, s.ablation).x_out;
  const ad::Var x2 = encode(tape, g2_, e2, s.params.weights, s.hyper, s.ablation).x_out;

  if (s.epoch % s.hyper.neg_refresh == 0) {
    s.negatives = sample_negatives(x1.value(), x2.value(), task_.seeds, s.hyper.neg_k, threads_);
    if (s.negatives.truncated && s.epoch == 0) {
      std::clog << "warning: fewer than k = " << s.hyper.neg_k
                << " negative candidates available; using all of them\n";
    }
  }
  const ad::Var loss = hinge_loss(x1, x2, task_.seeds, s.negatives, s.hyper.margin);
  const double value = loss.value()(0, 0);
  if (!std::isfinite(value)) {
    throw TrainingDiverged("training diverged at epoch " + std::to_string(s.epoch) +
                           ": loss is " + std::to_string(value));
  }
  tape.backward(loss);
  s.optimizer.update(s.params.parameters());
  s.loss_history.push_back(value);
  ++s.epoch;
  return value;
}

void Trainer::run() {
  while (state_.epoch < state_.hyper.epochs) step();
}

std::pair<Matrix, Matrix> Trainer::embed() {
  TrainState& s = state_;
  return {encode_values(g1_, s.params.embeddings1.value, s.params.weights, s.hyper, s.ablation),
          encode_values(g2_, s.params.embeddings2.value, s.params.weights, s.hyper, s.ablation)};
}

TrainState train(const AlignmentTask& task, const Matrix& embeddings1, const Matrix& embeddings2,
                 const HyperParams& hyper, const Ablation& ablation, std::uint64_t rng_seed,
                 int threads) {
  Trainer trainer(task, init_train_state(embeddings1, embeddings2, hyper, ablation, rng_seed),
                  threads);
  trainer.run();
  return std::move(trainer.state());
}

}  // namespace raga
