// raga: train, align and evaluate entity-alignment runs.
//
//   raga gen-synth --out DIR [--n-entities N ...]
//   raga train     --config FILE [overrides]
//   raga align     --config FILE [--checkpoint FILE] [--matcher daa]
//   raga eval      --config FILE (--alignment FILE | --checkpoint FILE)
//   raga sweep     --config FILE --ratios 0.1,0.2,...
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "raga/checkpoint.hpp"
#include "raga/config.hpp"
#include "raga/io.hpp"
#include "raga/kernels.hpp"
#include "raga/pipeline.hpp"
#include "raga/synthetic.hpp"
#include "raga/trainer.hpp"

namespace fs = std::filesystem;
using namespace raga;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> kg1, kg2, seeds, tests, emb1, emb2, out;
  std::optional<int> d_e, d_r, gcn_depth, neg_k, neg_refresh, epochs, threads;
  std::optional<double> margin, lr, leaky_slope;
  std::optional<std::uint64_t> rng_seed;
  std::optional<std::string> matcher;
  bool no_bna = false, no_rgat = false, no_fine_grained = false, gat_self_features = false;
  // synthetic generator
  std::optional<int> n_entities, n_relations, n_triples, embed_dim;
  std::optional<double> edge_noise, embed_noise, seed_ratio;
  std::optional<std::uint64_t> synth_seed;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "JSON run configuration");
  cmd->add_option("--kg1", o.kg1, "KG1 triple file");
  cmd->add_option("--kg2", o.kg2, "KG2 triple file");
  cmd->add_option("--seeds", o.seeds, "seed pair file");
  cmd->add_option("--tests", o.tests, "test pair file");
  cmd->add_option("--emb1", o.emb1, "KG1 embedding file");
  cmd->add_option("--emb2", o.emb2, "KG2 embedding file");
  cmd->add_option("-o,--out", o.out, "output directory");
  cmd->add_option("--threads", o.threads, "worker threads for distance kernels");
  cmd->add_option("--seed", o.rng_seed, "RNG seed for parameter initialisation");
}

void add_model(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--d-e", o.d_e, "entity embedding width (0 = from file)");
  cmd->add_option("--d-r", o.d_r, "relation projection width");
  cmd->add_option("--gcn-depth", o.gcn_depth, "highway-GCN layers");
  cmd->add_option("--leaky-slope", o.leaky_slope, "LeakyReLU negative slope");
  cmd->add_option("--margin", o.margin, "hinge margin");
  cmd->add_option("--neg-k", o.neg_k, "negatives per side");
  cmd->add_option("--neg-refresh", o.neg_refresh, "epochs between negative refreshes");
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_flag("--no-bna", o.no_bna, "skip the highway-GCN stage");
  cmd->add_flag("--no-rgat", o.no_rgat, "skip the relation-aware attention stages");
  cmd->add_flag("--gat-self-features", o.gat_self_features,
                "aggregate the node's own features in the neighbour attention");
}

void add_matching(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--matcher", o.matcher, "local | daa | hungarian");
  cmd->add_flag("--no-fine-grained", o.no_fine_grained, "match on the raw similarity");
}

void add_synthetic(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--n-entities", o.n_entities);
  cmd->add_option("--n-relations", o.n_relations);
  cmd->add_option("--n-triples", o.n_triples);
  cmd->add_option("--edge-noise", o.edge_noise);
  cmd->add_option("--embed-noise", o.embed_noise);
  cmd->add_option("--seed-ratio", o.seed_ratio);
  cmd->add_option("--embed-dim", o.embed_dim);
  cmd->add_option("--synth-seed", o.synth_seed, "RNG seed for the generator");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.kg1) c.paths.kg1_triples = *o.kg1;
  if (o.kg2) c.paths.kg2_triples = *o.kg2;
  if (o.seeds) c.paths.seeds = *o.seeds;
  if (o.tests) c.paths.tests = *o.tests;
  if (o.emb1) c.paths.kg1_embeddings = *o.emb1;
  if (o.emb2) c.paths.kg2_embeddings = *o.emb2;
  if (o.out) c.paths.output_dir = *o.out;
  if (o.d_e) c.hyper.d_e = *o.d_e;
  if (o.d_r) c.hyper.d_r = *o.d_r;
  if (o.gcn_depth) c.hyper.gcn_depth = *o.gcn_depth;
  if (o.leaky_slope) c.hyper.leaky_slope = *o.leaky_slope;
  if (o.margin) c.hyper.margin = *o.margin;
  if (o.neg_k) c.hyper.neg_k = *o.neg_k;
  if (o.neg_refresh) c.hyper.neg_refresh = *o.neg_refresh;
  if (o.lr) c.hyper.learning_rate = *o.lr;
  if (o.epochs) c.hyper.epochs = *o.epochs;
  if (o.threads) c.threads = *o.threads;
  if (o.rng_seed) c.rng_seed = *o.rng_seed;
  if (o.matcher) {
    try {
      c.matcher = parse_method(*o.matcher);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  c.ablation.no_bna = c.ablation.no_bna || o.no_bna;
  c.ablation.no_rgat = c.ablation.no_rgat || o.no_rgat;
  c.ablation.no_fine_grained = c.ablation.no_fine_grained || o.no_fine_grained;
  c.ablation.gat_self_features = c.ablation.gat_self_features || o.gat_self_features;
  if (o.n_entities) c.synthetic.n_entities = *o.n_entities;
  if (o.n_relations) c.synthetic.n_relations = *o.n_relations;
  if (o.n_triples) c.synthetic.n_triples = *o.n_triples;
  if (o.edge_noise) c.synthetic.edge_noise = *o.edge_noise;
  if (o.embed_noise) c.synthetic.embed_noise = *o.embed_noise;
  if (o.seed_ratio) c.synthetic.seed_ratio = *o.seed_ratio;
  if (o.embed_dim) c.synthetic.embed_dim = *o.embed_dim;
  if (o.synth_seed) c.synthetic.rng_seed = *o.synth_seed;
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  return c;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_gen_synth(const Overrides& o) {
  RunConfig c = resolve(o);
  try {
    (void)generate_synthetic_pair(c.synthetic);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const SyntheticPair pair = generate_synthetic_pair(c.synthetic);
  const fs::path dir = c.paths.output_dir;
  ensure_dir(dir);
  c.paths.kg1_triples = dir / "kg1_triples.tsv";
  c.paths.kg2_triples = dir / "kg2_triples.tsv";
  c.paths.seeds = dir / "seeds.tsv";
  c.paths.tests = dir / "tests.tsv";
  c.paths.kg1_embeddings = dir / "kg1_embeddings.txt";
  c.paths.kg2_embeddings = dir / "kg2_embeddings.txt";
  write_triples(c.paths.kg1_triples, pair.task.kg1);
  write_triples(c.paths.kg2_triples, pair.task.kg2);
  write_pairs(c.paths.seeds, pair.task.seeds, pair.task.kg1, pair.task.kg2);
  write_pairs(c.paths.tests, pair.task.tests, pair.task.kg1, pair.task.kg2);
  write_embeddings(c.paths.kg1_embeddings, pair.embeddings1, pair.task.kg1);
  write_embeddings(c.paths.kg2_embeddings, pair.embeddings2, pair.task.kg2);
  save_config(dir / "config.json", c);
  std::cout << "wrote synthetic task (" << pair.task.seeds.size() << " seeds, "
            << pair.task.tests.size() << " tests) to " << dir.string() << "\n";
  return 0;
}

int cmd_train(const Overrides& o, const std::optional<std::string>& resume) {
  RunConfig c = resolve(o);
  const LoadedTask data = load_task(c);
  c.hyper = resolve_hyper(c.hyper, data.embeddings1.cols());
  ensure_dir(c.paths.output_dir);

  TrainState state;
  if (resume) {
    state = load_checkpoint(*resume);
    if (state.hyper.d_e != c.hyper.d_e || state.hyper.d_r != c.hyper.d_r ||
        state.hyper.gcn_depth != c.hyper.gcn_depth) {
      throw ConfigError("checkpoint dimensions do not match the configuration");
    }
    state.hyper.epochs = c.hyper.epochs;
  } else {
    state = init_train_state(data.embeddings1, data.embeddings2, c.hyper, c.ablation, c.rng_seed);
  }
  Trainer trainer(data.task, std::move(state), c.threads);
  std::ofstream log(c.paths.output_dir / "loss.tsv", resume ? std::ios::app : std::ios::trunc);
  log.precision(17);
  if (!resume) log << "epoch\tloss\n";
  while (trainer.state().epoch < trainer.state().hyper.epochs) {
    const int epoch = trainer.state().epoch;
    const double loss = trainer.step();
    log << epoch << '\t' << loss << '\n';
  }
  save_checkpoint(c.paths.output_dir / "checkpoint.json", trainer.state());
  save_config(c.paths.output_dir / "effective_config.json", c);
  const auto& hist = trainer.state().loss_history;
  std::cout << "trained " << trainer.state().epoch << " epochs";
  if (!hist.empty()) std::cout << ", final loss " << hist.back();
  std::cout << " (kernels: " << kernels::isa_name(kernels::active().isa) << ")\n";
  return 0;
}

// Encodes both graphs with a checkpoint after checking it fits the data.
std::pair<Matrix, Matrix> encode_with(const TrainState& state, const LoadedTask& data) {
  if (state.params.embeddings1.value.rows() != data.task.kg1.entity_count() ||
      state.params.embeddings2.value.rows() != data.task.kg2.entity_count() ||
      state.params.embeddings1.value.cols() != data.embeddings1.cols()) {
    throw ConfigError("checkpoint dimensions (" + shape_string(state.params.embeddings1.value) +
                      ", " + shape_string(state.params.embeddings2.value) +
                      ") do not match the data (" + std::to_string(data.task.kg1.entity_count()) +
                      ", " + std::to_string(data.task.kg2.entity_count()) + " entities, width " +
                      std::to_string(data.embeddings1.cols()) + ")");
  }
  TrainState s = state;
  const GraphStructure g1 = prepare_graph(data.task.kg1);
  const GraphStructure g2 = prepare_graph(data.task.kg2);
  return {encode_values(g1, s.params.embeddings1.value, s.params.weights, s.hyper, s.ablation),
          encode_values(g2, s.params.embeddings2.value, s.params.weights, s.hyper, s.ablation)};
}

fs::path checkpoint_path(const RunConfig& c, const std::optional<std::string>& given) {
  fs::path p = given ? fs::path(*given) : c.paths.output_dir / "checkpoint.json";
  if (!fs::is_regular_file(p)) throw ConfigError("checkpoint not found: " + p.string());
  return p;
}

int cmd_align(const Overrides& o, const std::optional<std::string>& ckpt) {
  const RunConfig c = resolve(o);
  const LoadedTask data = load_task(c);
  const TrainState state = load_checkpoint(checkpoint_path(c, ckpt));
  const auto [x1, x2] = encode_with(state, data);
  const AlignOutcome outcome = align_and_evaluate(x1, x2, data.task.tests, c.matcher,
                                                  c.ablation.no_fine_grained, c.threads);
  ensure_dir(c.paths.output_dir);
  write_alignment(c.paths.output_dir / "alignment.tsv", outcome.alignment, data.task.kg1,
                  data.task.kg2);
  std::string kv = outcome.report.to_key_values();
  kv += "matcher=" + std::string(method_name(c.matcher)) + "\n";
  kv += "fine_grained=" + std::string(c.ablation.no_fine_grained ? "false" : "true") + "\n";
  write_text(c.paths.output_dir / "metrics.txt", kv);
  std::cout << outcome.report.to_table();
  return 0;
}

int cmd_eval(const Overrides& o, const std::optional<std::string>& alignment_file,
             const std::optional<std::string>& ckpt) {
  const RunConfig c = resolve(o);
  const LoadedTask data = load_task(c);
  MetricsReport report;
  if (alignment_file) {
    if (!fs::is_regular_file(*alignment_file)) {
      throw ConfigError("alignment not found: " + *alignment_file);
    }
    const Alignment a = load_alignment(*alignment_file, data.task.kg1, data.task.kg2);
    if (a.method == MatchMethod::Local) {
      // Local alignments may be many-to-one; score them as plain H@1.
      std::size_t hits = 0;
      for (const EntityPair& p : data.task.tests)
        if (a.target_of[static_cast<std::size_t>(p.source)] == p.target) ++hits;
      report.test_pairs = data.task.tests.size();
      report.hits_at[1] = report.test_pairs == 0 ? 0.0 : static_cast<double>(hits) / report.test_pairs;
      report.conflict_count = conflict_count(a);
    } else {
      report = global_metrics(a, data.task.tests);
    }
  } else {
    const TrainState state = load_checkpoint(checkpoint_path(c, ckpt));
    const auto [x1, x2] = encode_with(state, data);
    report = rank_metrics(raw_similarity(x1, x2, c.threads).values, data.task.tests, {1, 5, 10});
  }
  std::cout << report.to_table() << "\n" << report.to_key_values();
  return 0;
}

int cmd_sweep(const Overrides& o, const std::vector<double>& ratios) {
  const RunConfig c = resolve(o);
  const std::vector<double>& use = ratios.empty() ? c.seed_ratios : ratios;
  const std::vector<SweepRow> rows = synthetic_sweep(c, use);
  std::ostringstream table;
  table.precision(6);
  table << "seed_ratio\thits@1\thits@10\tmrr";
  if (c.matcher != MatchMethod::Local) table << "\tone_to_one_h1";
  table << "\n";
  for (const SweepRow& r : rows) {
    table << r.seed_ratio << '\t' << r.report.hits_at.at(1) << '\t' << r.report.hits_at.at(10) << '\t'
          << r.report.mrr.value_or(0.0);
    if (c.matcher != MatchMethod::Local) table << '\t' << r.report.one_to_one_h1.value_or(0.0);
    table << "\n";
  }
  std::cout << table.str();
  if (!rows.empty() || !c.paths.output_dir.empty()) {
    ensure_dir(c.paths.output_dir);
    write_text(c.paths.output_dir / "sweep.tsv", table.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation-aware graph attention entity alignment"};
  app.require_subcommand(1);
  Overrides o;
  std::optional<std::string> resume, checkpoint, alignment_file;
  std::vector<double> ratios;

  auto* gen = app.add_subcommand("gen-synth", "write a synthetic aligned KG pair");
  add_common(gen, o);
  add_synthetic(gen, o);

  auto* train = app.add_subcommand("train", "train the encoder and write a checkpoint");
  add_common(train, o);
  add_model(train, o);
  train->add_option("--resume", resume, "continue from this checkpoint");

  auto* align = app.add_subcommand("align", "encode, match and evaluate");
  add_common(align, o);
  add_matching(align, o);
  align->add_option("--checkpoint", checkpoint, "checkpoint (default: <out>/checkpoint.json)");

  auto* eval = app.add_subcommand("eval", "evaluate an alignment file or a checkpoint");
  add_common(eval, o);
  eval->add_option("--alignment", alignment_file, "alignment TSV");
  eval->add_option("--checkpoint", checkpoint, "checkpoint for rank metrics");

  auto* sweep = app.add_subcommand("sweep", "seed-ratio sweep on synthetic data");
  add_common(sweep, o);
  add_model(sweep, o);
  add_matching(sweep, o);
  add_synthetic(sweep, o);
  sweep->add_option("--ratios", ratios, "seed ratios, comma separated")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen_synth(o);
    if (*train) return cmd_train(o, resume);
    if (*align) return cmd_align(o, checkpoint);
    if (*eval) return cmd_eval(o, alignment_file, checkpoint);
    if (*sweep) return cmd_sweep(o, ratios);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
