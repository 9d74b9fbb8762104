#include "raga/config.hpp"

#include <fstream>
#include <set>

namespace raga {

using nlohmann::json;

void RunConfig::require_data_files() const {
  const std::pair<const char*, const std::filesystem::path*> required[] = {
      {"kg1 triples", &paths.kg1_triples}, {"kg2 triples", &paths.kg2_triples},
      {"seeds", &paths.seeds},             {"tests", &paths.tests},
      {"kg1 embeddings", &paths.kg1_embeddings}, {"kg2 embeddings", &paths.kg2_embeddings}};
  for (const auto& [what, p] : required) {
    if (p->empty()) throw ConfigError(std::string(what) + " path not set");
    if (!std::filesystem::is_regular_file(*p)) {
      throw ConfigError(std::string(what) + " not found: " + p->string());
    }
  }
}

json to_json(const RunConfig& c) {
  const HyperParams& h = c.hyper;
  const SyntheticParams& s = c.synthetic;
  return json{
      {"paths",
       {{"kg1_triples", c.paths.kg1_triples.string()},
        {"kg2_triples", c.paths.kg2_triples.string()},
        {"seeds", c.paths.seeds.string()},
        {"tests", c.paths.tests.string()},
        {"kg1_embeddings", c.paths.kg1_embeddings.string()},
        {"kg2_embeddings", c.paths.kg2_embeddings.string()},
        {"output_dir", c.paths.output_dir.string()}}},
      {"hyper",
       {{"d_e", h.d_e},
        {"d_r", h.d_r},
        {"gcn_depth", h.gcn_depth},
        {"leaky_slope", h.leaky_slope},
        {"margin", h.margin},
        {"neg_k", h.neg_k},
        {"neg_refresh", h.neg_refresh},
        {"learning_rate", h.learning_rate},
        {"epochs", h.epochs}}},
      {"ablation",
       {{"no_bna", c.ablation.no_bna},
        {"no_rgat", c.ablation.no_rgat},
        {"no_fine_grained", c.ablation.no_fine_grained},
        {"gat_self_features", c.ablation.gat_self_features}}},
      {"matcher", std::string(method_name(c.matcher))},
      {"rng_seed", c.rng_seed},
      {"threads", c.threads},
      {"synthetic",
       {{"n_entities", s.n_entities},
        {"n_relations", s.n_relations},
        {"n_triples", s.n_triples},
        {"edge_noise", s.edge_noise},
        {"embed_noise", s.embed_noise},
        {"seed_ratio", s.seed_ratio},
        {"embed_dim", s.embed_dim},
        {"rng_seed", s.rng_seed}}},
      {"seed_ratios", c.seed_ratios}};
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (ok.count(key) == 0) throw ConfigError(std::string("unknown key '") + key + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& dst) {
  if (auto it = obj.find(key); it != obj.end()) dst = it->get<T>();
}

void read_path(const json& obj, const char* key, std::filesystem::path& dst) {
  if (auto it = obj.find(key); it != obj.end()) dst = it->get<std::string>();
}

}  // namespace

RunConfig config_from_json(const json& j, RunConfig c) {
  try {
    reject_unknown(j,
                   {"paths", "hyper", "ablation", "matcher", "rng_seed", "threads", "synthetic",
                    "seed_ratios"},
                   "config");
    if (auto it = j.find("paths"); it != j.end()) {
      reject_unknown(*it,
                     {"kg1_triples", "kg2_triples", "seeds", "tests", "kg1_embeddings",
                      "kg2_embeddings", "output_dir"},
                     "paths");
      read_path(*it, "kg1_triples", c.paths.kg1_triples);
      read_path(*it, "kg2_triples", c.paths.kg2_triples);
      read_path(*it, "seeds", c.paths.seeds);
      read_path(*it, "tests", c.paths.tests);
      read_path(*it, "kg1_embeddings", c.paths.kg1_embeddings);
      read_path(*it, "kg2_embeddings", c.paths.kg2_embeddings);
      read_path(*it, "output_dir", c.paths.output_dir);
    }
    if (auto it = j.find("hyper"); it != j.end()) {
      reject_unknown(*it,
                     {"d_e", "d_r", "gcn_depth", "leaky_slope", "margin", "neg_k", "neg_refresh",
                      "learning_rate", "epochs"},
                     "hyper");
      read(*it, "d_e", c.hyper.d_e);
      read(*it, "d_r", c.hyper.d_r);
      read(*it, "gcn_depth", c.hyper.gcn_depth);
      read(*it, "leaky_slope", c.hyper.leaky_slope);
      read(*it, "margin", c.hyper.margin);
      read(*it, "neg_k", c.hyper.neg_k);
      read(*it, "neg_refresh", c.hyper.neg_refresh);
      read(*it, "learning_rate", c.hyper.learning_rate);
      read(*it, "epochs", c.hyper.epochs);
    }
    if (auto it = j.find("ablation"); it != j.end()) {
      reject_unknown(*it, {"no_bna", "no_rgat", "no_fine_grained", "gat_self_features"},
                     "ablation");
      read(*it, "no_bna", c.ablation.no_bna);
      read(*it, "no_rgat", c.ablation.no_rgat);
      read(*it, "no_fine_grained", c.ablation.no_fine_grained);
      read(*it, "gat_self_features", c.ablation.gat_self_features);
    }
    if (auto it = j.find("matcher"); it != j.end()) c.matcher = parse_method(it->get<std::string>());
    read(j, "rng_seed", c.rng_seed);
    read(j, "threads", c.threads);
    if (auto it = j.find("synthetic"); it != j.end()) {
      reject_unknown(*it,
                     {"n_entities", "n_relations", "n_triples", "edge_noise", "embed_noise",
                      "seed_ratio", "embed_dim", "rng_seed"},
                     "synthetic");
      read(*it, "n_entities", c.synthetic.n_entities);
      read(*it, "n_relations", c.synthetic.n_relations);
      read(*it, "n_triples", c.synthetic.n_triples);
      read(*it, "edge_noise", c.synthetic.edge_noise);
      read(*it, "embed_noise", c.synthetic.embed_noise);
      read(*it, "seed_ratio", c.synthetic.seed_ratio);
      read(*it, "embed_dim", c.synthetic.embed_dim);
      read(*it, "rng_seed", c.synthetic.rng_seed);
    }
    read(j, "seed_ratios", c.seed_ratios);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config not found: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const RunConfig& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(c).dump(2) << '\n';
}

}  // namespace raga
