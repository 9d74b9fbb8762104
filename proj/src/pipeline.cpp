#include "raga/pipeline.hpp"

namespace raga {

LoadedTask load_task(const RunConfig& config) {
  config.require_data_files();
  LoadedTask out;
  const RunPaths& p = config.paths;
  out.task.kg1 = load_graph(p.kg1_triples);
  out.task.kg2 = load_graph(p.kg2_triples);
  out.embeddings1 = load_embeddings(p.kg1_embeddings, out.task.kg1);
  out.embeddings2 = load_embeddings(p.kg2_embeddings, out.task.kg2);
  if (out.embeddings1.cols() != out.embeddings2.cols()) {
    throw ConfigError("embedding widths differ: " + std::to_string(out.embeddings1.cols()) +
                      " vs " + std::to_string(out.embeddings2.cols()));
  }
  out.task.seeds = load_pairs(p.seeds, out.task.kg1, out.task.kg2);
  out.task.tests = load_pairs(p.tests, out.task.kg1, out.task.kg2);
  out.task.validate();
  return out;
}

HyperParams resolve_hyper(HyperParams hyper, std::size_t embedding_dim) {
  if (hyper.d_e == 0) hyper.d_e = static_cast<int>(embedding_dim);
  if (static_cast<std::size_t>(hyper.d_e) != embedding_dim) {
    throw ConfigError("d_e = " + std::to_string(hyper.d_e) + " but embeddings have width " +
                      std::to_string(embedding_dim));
  }
  try {
    hyper.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return hyper;
}

AlignOutcome align_and_evaluate(const Matrix& x1, const Matrix& x2,
                                const std::vector<EntityPair>& tests, MatchMethod matcher,
                                bool no_fine_grained, int threads) {
  AlignOutcome out;
  out.raw = raw_similarity(x1, x2, threads);
  out.report = rank_metrics(out.raw.values, tests, {1, 10});
  const Matrix scores = no_fine_grained ? out.raw.values : fine_grained(out.raw).values;
  switch (matcher) {
    case MatchMethod::Local: {
      LocalAlignment local = local_align(scores);
      out.report.conflict_count = local.conflicted_targets.size();
      out.alignment = std::move(local.alignment);
      break;
    }
    case MatchMethod::Daa:
      out.alignment = daa_align(scores);
      break;
    case MatchMethod::Hungarian:
      out.alignment = hungarian_align(scores);
      break;
  }
  if (matcher != MatchMethod::Local) {
    const MetricsReport global = global_metrics(out.alignment, tests);
    out.report.one_to_one_h1 = global.one_to_one_h1;
    out.report.conflict_count = global.conflict_count;
  }
  return out;
}

std::vector<SweepRow> synthetic_sweep(const RunConfig& config, const std::vector<double>& ratios) {
  std::vector<SweepRow> rows;
  for (double ratio : ratios) {
    SyntheticParams sp = config.synthetic;
    sp.seed_ratio = ratio;
    const SyntheticPair pair = generate_synthetic_pair(sp);
    const HyperParams hyper = resolve_hyper(config.hyper, pair.embeddings1.cols());
    Trainer trainer(pair.task,
                    init_train_state(pair.embeddings1, pair.embeddings2, hyper, config.ablation,
                                     config.rng_seed),
                    config.threads);
    trainer.run();
    const auto [x1, x2] = trainer.embed();
    AlignOutcome outcome = align_and_evaluate(x1, x2, pair.task.tests, config.matcher,
                                              config.ablation.no_fine_grained, config.threads);
    rows.push_back({ratio, std::move(outcome.report)});
  }
  return rows;
}

}  // namespace raga
