#include "raga/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace raga {
namespace {

using nlohmann::json;

json to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()},
              {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

Parameter parameter_from(const json& j) { return Parameter(matrix_from(j)); }

json hyper_json(const HyperParams& h) {
  return json{{"d_e", h.d_e},
              {"d_r", h.d_r},
              {"gcn_depth", h.gcn_depth},
              {"leaky_slope", h.leaky_slope},
              {"margin", h.margin},
              {"neg_k", h.neg_k},
              {"neg_refresh", h.neg_refresh},
              {"learning_rate", h.learning_rate},
              {"epochs", h.epochs}};
}

HyperParams hyper_from(const json& j) {
  HyperParams h;
  h.d_e = j.at("d_e");
  h.d_r = j.at("d_r");
  h.gcn_depth = j.at("gcn_depth");
  h.leaky_slope = j.at("leaky_slope");
  h.margin = j.at("margin");
  h.neg_k = j.at("neg_k");
  h.neg_refresh = j.at("neg_refresh");
  h.learning_rate = j.at("learning_rate");
  h.epochs = j.at("epochs");
  return h;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainState& s) {
  json weights;
  const EncoderWeights& w = s.params.weights;
  json gates = json::array();
  for (std::size_t l = 0; l < w.gate_weight.size(); ++l) {
    gates.push_back({{"weight", to_json(w.gate_weight[l].value)},
                     {"bias", to_json(w.gate_bias[l].value)}});
  }
  weights["gates"] = gates;
  weights["w_head"] = to_json(w.w_head.value);
  weights["w_tail"] = to_json(w.w_tail.value);
  weights["attn_rel_head"] = to_json(w.attn_rel_head.value);
  weights["attn_rel_tail"] = to_json(w.attn_rel_tail.value);
  weights["attn_out"] = to_json(w.attn_out.value);
  weights["attn_in"] = to_json(w.attn_in.value);
  weights["attn_gat"] = to_json(w.attn_gat.value);

  json moments1 = json::array();
  json moments2 = json::array();
  for (const Matrix& m : s.optimizer.first_moment) moments1.push_back(to_json(m));
  for (const Matrix& m : s.optimizer.second_moment) moments2.push_back(to_json(m));

  std::ostringstream rng;
  rng << s.rng;

  const json doc{
      {"format", "raga-checkpoint"},
      {"version", kCheckpointVersion},
      {"hyper", hyper_json(s.hyper)},
      {"ablation",
       {{"no_bna", s.ablation.no_bna},
        {"no_rgat", s.ablation.no_rgat},
        {"no_fine_grained", s.ablation.no_fine_grained},
        {"gat_self_features", s.ablation.gat_self_features}}},
      {"rng_seed", s.rng_seed},
      {"rng_state", rng.str()},
      {"epoch", s.epoch},
      {"loss_history", s.loss_history},
      {"embeddings1", to_json(s.params.embeddings1.value)},
      {"embeddings2", to_json(s.params.embeddings2.value)},
      {"weights", weights},
      {"optimizer",
       {{"learning_rate", s.optimizer.learning_rate},
        {"beta1", s.optimizer.beta1},
        {"beta2", s.optimizer.beta2},
        {"epsilon", s.optimizer.epsilon},
        {"step", s.optimizer.step},
        {"first_moment", moments1},
        {"second_moment", moments2}}},
      {"negatives",
       {{"source", s.negatives.source},
        {"target", s.negatives.target},
        {"owner", s.negatives.owner},
        {"per_pair", s.negatives.per_pair},
        {"truncated", s.negatives.truncated}}}};

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  if (doc.value("format", "") != "raga-checkpoint") {
    throw std::runtime_error("checkpoint " + path.string() + ": unknown format");
  }
  if (doc.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("checkpoint " + path.string() + ": unsupported version " +
                             doc.at("version").dump());
  }
  try {
    TrainState s;
    s.hyper = hyper_from(doc.at("hyper"));
    const json& ab = doc.at("ablation");
    s.ablation.no_bna = ab.at("no_bna");
    s.ablation.no_rgat = ab.at("no_rgat");
    s.ablation.no_fine_grained = ab.at("no_fine_grained");
    s.ablation.gat_self_features = ab.at("gat_self_features");
    s.rng_seed = doc.at("rng_seed");
    std::istringstream rng(doc.at("rng_state").get<std::string>());
    rng >> s.rng;
    s.epoch = doc.at("epoch");
    s.loss_history = doc.at("loss_history").get<std::vector<double>>();
    s.params.embeddings1 = parameter_from(doc.at("embeddings1"));
    s.params.embeddings2 = parameter_from(doc.at("embeddings2"));

    const json& w = doc.at("weights");
    for (const json& g : w.at("gates")) {
      s.params.weights.gate_weight.push_back(parameter_from(g.at("weight")));
      s.params.weights.gate_bias.push_back(parameter_from(g.at("bias")));
    }
    s.params.weights.w_head = parameter_from(w.at("w_head"));
    s.params.weights.w_tail = parameter_from(w.at("w_tail"));
    s.params.weights.attn_rel_head = parameter_from(w.at("attn_rel_head"));
    s.params.weights.attn_rel_tail = parameter_from(w.at("attn_rel_tail"));
    s.params.weights.attn_out = parameter_from(w.at("attn_out"));
    s.params.weights.attn_in = parameter_from(w.at("attn_in"));
    s.params.weights.attn_gat = parameter_from(w.at("attn_gat"));

    const json& opt = doc.at("optimizer");
    s.optimizer.learning_rate = opt.at("learning_rate");
    s.optimizer.beta1 = opt.at("beta1");
    s.optimizer.beta2 = opt.at("beta2");
    s.optimizer.epsilon = opt.at("epsilon");
    s.optimizer.step = opt.at("step");
    for (const json& m : opt.at("first_moment")) s.optimizer.first_moment.push_back(matrix_from(m));
    for (const json& m : opt.at("second_moment")) s.optimizer.second_moment.push_back(matrix_from(m));

    const json& neg = doc.at("negatives");
    s.negatives.source = neg.at("source").get<std::vector<int>>();
    s.negatives.target = neg.at("target").get<std::vector<int>>();
    s.negatives.owner = neg.at("owner").get<std::vector<int>>();
    s.negatives.per_pair = neg.at("per_pair");
    s.negatives.truncated = neg.at("truncated");
    return s;
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint " + path.string() + " is incomplete: " + e.what());
  }
}

}  // namespace raga
