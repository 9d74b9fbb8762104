#include "raga/encoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace raga {

void HyperParams::validate() const {
  auto positive = [](bool ok, const char* name) {
    if (!ok) throw std::invalid_argument(std::string("hyper-parameter ") + name + " must be positive");
  };
  positive(d_e > 0, "d_e");
  positive(d_r > 0, "d_r");
  positive(gcn_depth >= 1, "gcn_depth");
  positive(leaky_slope > 0.0, "leaky_slope");
  positive(margin > 0.0, "margin");
  positive(neg_k > 0, "neg_k");
  positive(neg_refresh > 0, "neg_refresh");
  positive(learning_rate > 0.0, "learning_rate");
  positive(epochs >= 0, "epochs");
}

std::vector<Parameter*> EncoderWeights::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : gate_weight) out.push_back(&p);
  for (auto& p : gate_bias) out.push_back(&p);
  for (Parameter* p : {&w_head, &w_tail, &attn_rel_head, &attn_rel_tail, &attn_out, &attn_in,
                       &attn_gat})
    out.push_back(p);
  return out;
}

namespace {

Parameter glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = u(rng);
  return Parameter(std::move(m));
}

// LeakyReLU(a^T [src_i || dst_j]) for every listed pair, computed as
// a_top . src_i + a_bot . dst_j so the concatenation is never materialised.
ad::Var pair_scores(ad::Var src, ad::Var dst, const ad::Index& src_idx, const ad::Index& dst_idx,
                    ad::Var attn, double slope) {
  const std::size_t d1 = src.cols();
  const std::size_t d2 = dst.cols();
  if (attn.rows() != d1 + d2 || attn.cols() != 1) {
    throw DimensionError("attention vector is " + shape_string(attn.value()) + ", expected " +
                         std::to_string(d1 + d2) + "x1");
  }
  const ad::Var top = ad::slice_rows(attn, 0, d1);
  const ad::Var bottom = ad::slice_rows(attn, d1, d1 + d2);
  const ad::Var s = ad::add(ad::gather_rows(ad::matmul(src, top), src_idx),
                            ad::gather_rows(ad::matmul(dst, bottom), dst_idx));
  return ad::leaky_relu(s, slope);
}

}  // namespace

EncoderWeights init_encoder_weights(const HyperParams& hp, std::mt19937_64& rng) {
  hp.validate();
  const auto de = static_cast<std::size_t>(hp.d_e);
  const auto dr = static_cast<std::size_t>(hp.d_r);
  EncoderWeights w;
  for (int l = 0; l < hp.gcn_depth; ++l) {
    w.gate_weight.push_back(glorot(de, de, rng));
    w.gate_bias.emplace_back(Matrix(1, de));
  }
  w.w_head = glorot(de, dr, rng);
  w.w_tail = glorot(de, dr, rng);
  w.attn_rel_head = glorot(2 * dr, 1, rng);
  w.attn_rel_tail = glorot(2 * dr, 1, rng);
  w.attn_out = glorot(de + dr, 1, rng);
  w.attn_in = glorot(de + dr, 1, rng);
  w.attn_gat = glorot(2 * (de + 2 * dr), 1, rng);
  return w;
}

GraphStructure prepare_graph(const KnowledgeGraph& kg) {
  GraphStructure g;
  g.n_entities = kg.entity_count();
  g.n_relations = kg.relation_count();
  g.adjacency = build_normalized_adjacency(kg);
  g.index = build_incidence_index(kg);
  const auto& idx = g.index;

  std::vector<int> rh, rt, rg;
  for (std::size_t k = 0; k < idx.heads_of_relation.size(); ++k) {
    for (int h : idx.heads_of_relation[k]) {
      for (int t : idx.tails_given_head_relation.at({h, static_cast<int>(k)})) {
        rh.push_back(h);
        rt.push_back(t);
        rg.push_back(static_cast<int>(k));
      }
    }
  }
  std::vector<int> oe, orl;
  for (std::size_t i = 0; i < g.n_entities; ++i) {
    for (int t : idx.tails_of_head[i]) {
      for (int r : idx.relations_between.at({static_cast<int>(i), t})) {
        oe.push_back(static_cast<int>(i));
        orl.push_back(r);
      }
    }
  }
  std::vector<int> ie, irl;
  for (std::size_t j = 0; j < g.n_entities; ++j) {
    for (int h : idx.heads_of_tail[j]) {
      for (int r : idx.relations_between.at({h, static_cast<int>(j)})) {
        ie.push_back(static_cast<int>(j));
        irl.push_back(r);
      }
    }
  }
  std::vector<int> ns, nd;
  for (std::size_t i = 0; i < g.n_entities; ++i) {
    for (int j : idx.neighbors[i]) {
      ns.push_back(static_cast<int>(i));
      nd.push_back(j);
    }
  }
  g.rel_head = ad::make_index(std::move(rh));
  g.rel_tail = ad::make_index(std::move(rt));
  g.rel_group = ad::make_index(std::move(rg));
  g.out_entity = ad::make_index(std::move(oe));
  g.out_relation = ad::make_index(std::move(orl));
  g.in_entity = ad::make_index(std::move(ie));
  g.in_relation = ad::make_index(std::move(irl));
  g.nbr_src = ad::make_index(std::move(ns));
  g.nbr_dst = ad::make_index(std::move(nd));
  return g;
}

ad::Var gcn_highway_forward(ad::Tape& tape, const GraphStructure& g, ad::Var x,
                            EncoderWeights& w, int depth) {
  if (depth < 1 || static_cast<std::size_t>(depth) > w.gate_weight.size()) {
    throw std::invalid_argument("gcn_highway_forward: depth " + std::to_string(depth) +
                                " exceeds the configured gate layers");
  }
  for (int l = 0; l < depth; ++l) {
    const ad::Var propagated = ad::relu(ad::spmm(g.adjacency, x));
    const ad::Var gate = ad::sigmoid(ad::add_row(
        ad::matmul(x, tape.parameter(w.gate_weight[static_cast<std::size_t>(l)])),
        tape.parameter(w.gate_bias[static_cast<std::size_t>(l)])));
    const ad::Var carry = ad::affine(gate, -1.0, 1.0);
    x = ad::add(ad::mul(gate, propagated), ad::mul(carry, x));
  }
  return x;
}

RelationStage relation_representations(ad::Tape& tape, const GraphStructure& g, ad::Var x_bna,
                                       EncoderWeights& w, double leaky_slope) {
  const ad::Var xh = ad::matmul(x_bna, tape.parameter(w.w_head));
  const ad::Var xt = ad::matmul(x_bna, tape.parameter(w.w_tail));
  const std::size_t m = g.n_relations;

  RelationStage out;
  // One softmax group per relation, over all of its (head, tail) incidences.
  const ad::Var sh = pair_scores(xh, xt, g.rel_head, g.rel_tail,
                                 tape.parameter(w.attn_rel_head), leaky_slope);
  out.head_attention = ad::segment_softmax(sh, g.rel_group, m);
  const ad::Var r_head =
      ad::relu(ad::segment_weighted_sum(xh, g.rel_head, out.head_attention, g.rel_group, m));

  const ad::Var st = pair_scores(xh, xt, g.rel_head, g.rel_tail,
                                 tape.parameter(w.attn_rel_tail), leaky_slope);
  out.tail_attention = ad::segment_softmax(st, g.rel_group, m);
  const ad::Var r_tail =
      ad::relu(ad::segment_weighted_sum(xt, g.rel_tail, out.tail_attention, g.rel_group, m));

  out.relations = ad::add(r_head, r_tail);
  return out;
}

EntityStage relation_aware_entities(ad::Tape& tape, const GraphStructure& g, ad::Var x_bna,
                                    ad::Var relations, EncoderWeights& w, double leaky_slope) {
  const std::size_t n = g.n_entities;
  EntityStage out;

  const ad::Var so = pair_scores(x_bna, relations, g.out_entity, g.out_relation,
                                 tape.parameter(w.attn_out), leaky_slope);
  out.out_attention = ad::segment_softmax(so, g.out_entity, n);
  const ad::Var x_head = ad::relu(
      ad::segment_weighted_sum(relations, g.out_relation, out.out_attention, g.out_entity, n));

  const ad::Var si = pair_scores(x_bna, relations, g.in_entity, g.in_relation,
                                 tape.parameter(w.attn_in), leaky_slope);
  out.in_attention = ad::segment_softmax(si, g.in_entity, n);
  const ad::Var x_tail = ad::relu(
      ad::segment_weighted_sum(relations, g.in_relation, out.in_attention, g.in_entity, n));

  out.x_rel = ad::concat_cols({x_bna, x_head, x_tail});
  return out;
}

EnhancedStage enhanced_entities(ad::Tape& tape, const GraphStructure& g, ad::Var x_rel,
                                EncoderWeights& w, double leaky_slope, bool self_features) {
  const std::size_t n = g.n_entities;
  EnhancedStage out;
  const ad::Var s =
      pair_scores(x_rel, x_rel, g.nbr_src, g.nbr_dst, tape.parameter(w.attn_gat), leaky_slope);
  out.attention = ad::segment_softmax(s, g.nbr_src, n);
  const ad::Index& values = self_features ? g.nbr_src : g.nbr_dst;
  const ad::Var agg =
      ad::relu(ad::segment_weighted_sum(x_rel, values, out.attention, g.nbr_src, n));
  out.x_out = ad::concat_cols({x_rel, agg});
  return out;
}

EncoderOutput encode(ad::Tape& tape, const GraphStructure& g, ad::Var embeddings,
                     EncoderWeights& w, const HyperParams& hp, const Ablation& ablation) {
  if (embeddings.rows() != g.n_entities || embeddings.cols() != static_cast<std::size_t>(hp.d_e)) {
    throw DimensionError("encode: embeddings are " + shape_string(embeddings.value()) +
                         ", graph has " + std::to_string(g.n_entities) + " entities and d_e = " +
                         std::to_string(hp.d_e));
  }
  EncoderOutput out;
  out.x_bna = ablation.no_bna ? embeddings
                              : gcn_highway_forward(tape, g, embeddings, w, hp.gcn_depth);
  if (ablation.no_rgat) {
    out.x_out = out.x_bna;
    return out;
  }
  const RelationStage rel = relation_representations(tape, g, out.x_bna, w, hp.leaky_slope);
  const EntityStage ent =
      relation_aware_entities(tape, g, out.x_bna, rel.relations, w, hp.leaky_slope);
  const EnhancedStage enh =
      enhanced_entities(tape, g, ent.x_rel, w, hp.leaky_slope, ablation.gat_self_features);
  out.relations = rel.relations;
  out.rel_head_attention = rel.head_attention;
  out.rel_tail_attention = rel.tail_attention;
  out.x_rel = ent.x_rel;
  out.out_attention = ent.out_attention;
  out.in_attention = ent.in_attention;
  out.x_out = enh.x_out;
  out.neighbor_attention = enh.attention;
  out.has_rgat = true;
  return out;
}

std::size_t output_dim(const HyperParams& hp, const Ablation& ablation) {
  if (ablation.no_rgat) return static_cast<std::size_t>(hp.d_e);
  return 2 * static_cast<std::size_t>(hp.d_e + 2 * hp.d_r);
}

Matrix encode_values(const GraphStructure& g, const Matrix& embeddings, EncoderWeights& w,
                     const HyperParams& hp, const Ablation& ablation) {
  ad::Tape tape;
  const ad::Var x = tape.constant(embeddings);
  return encode(tape, g, x, w, hp, ablation).x_out.value();
}

}  // namespace raga
