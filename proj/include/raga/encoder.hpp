#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "raga/autodiff.hpp"
#include "raga/kg.hpp"
#include "raga/matrix.hpp"

namespace raga {

/// Model and training hyper-parameters. Defaults follow the reference
/// DBP15K configuration except d_e, which must match the input embeddings.
struct HyperParams {
  int d_e = 300;              // entity embedding width
  int d_r = 100;              // relation projection width
  int gcn_depth = 2;          // highway-GCN layers
  double leaky_slope = 0.2;   // LeakyReLU negative slope in every attention
  double margin = 3.0;        // hinge margin
  int neg_k = 5;              // nearest-neighbour negatives per side
  int neg_refresh = 5;        // epochs between negative refreshes
  double learning_rate = 1e-3;
  int epochs = 100;

  /// Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

/// Switches for the ablation variants.
struct Ablation {
  bool no_bna = false;           // skip the highway-GCN stage
  bool no_rgat = false;          // stop after the highway-GCN stage
  bool no_fine_grained = false;  // match on raw similarity (alignment only)
  /// Neighbour aggregation sums alpha_ij * x_i (the node's own features)
  /// instead of alpha_ij * x_j. Kept for comparison only.
  bool gat_self_features = false;
};

/// Weights shared by both graphs.
struct EncoderWeights {
  std::vector<Parameter> gate_weight;  // per layer, d_e x d_e
  std::vector<Parameter> gate_bias;    // per layer, 1 x d_e
  Parameter w_head;                    // d_e x d_r
  Parameter w_tail;                    // d_e x d_r
  Parameter attn_rel_head;             // 2 d_r x 1, scores [x_h W_h || x_t W_t] for r^h
  Parameter attn_rel_tail;             // 2 d_r x 1, same input, for r^t
  Parameter attn_out;                  // (d_e + d_r) x 1, out-relations
  Parameter attn_in;                   // (d_e + d_r) x 1, in-relations
  Parameter attn_gat;                  // 2 (d_e + 2 d_r) x 1

  std::vector<Parameter*> parameters();
};

/// Glorot-uniform matrices and attention vectors; zero gate biases.
EncoderWeights init_encoder_weights(const HyperParams& hp, std::mt19937_64& rng);

/// Per-graph structure derived once from a KnowledgeGraph: the normalised
/// adjacency plus flat incidence lists in attention-group order.
struct GraphStructure {
  std::size_t n_entities = 0;
  std::size_t n_relations = 0;
  NormalizedAdjacency adjacency;
  RelationIncidenceIndex index;

  // One entry per triple, grouped by relation (relation -> head -> tail).
  ad::Index rel_head, rel_tail, rel_group;
  // One entry per (head, relation, tail), grouped by head (head -> tail -> relation).
  ad::Index out_entity, out_relation;
  // Mirror of the above grouped by tail.
  ad::Index in_entity, in_relation;
  // Directed neighbour pairs (i, j), j in N_i, grouped by i.
  ad::Index nbr_src, nbr_dst;
};

GraphStructure prepare_graph(const KnowledgeGraph& kg);

/// Every intermediate of one encoder pass. Attention vars are column vectors
/// aligned with the corresponding GraphStructure lists.
struct EncoderOutput {
  ad::Var x_bna;      // n x d_e
  ad::Var relations;  // m x d_r
  ad::Var x_rel;      // n x (d_e + 2 d_r)
  ad::Var x_out;      // n x 2 (d_e + 2 d_r), or x_bna under no_rgat
  ad::Var rel_head_attention, rel_tail_attention;
  ad::Var out_attention, in_attention;
  ad::Var neighbor_attention;
  bool has_rgat = false;
};

// Individual stages; `encode` chains them.
ad::Var gcn_highway_forward(ad::Tape& tape, const GraphStructure& g, ad::Var x,
                            EncoderWeights& w, int depth);

struct RelationStage {
  ad::Var relations, head_attention, tail_attention;
};
RelationStage relation_representations(ad::Tape& tape, const GraphStructure& g, ad::Var x_bna,
                                       EncoderWeights& w, double leaky_slope);

struct EntityStage {
  ad::Var x_rel, out_attention, in_attention;
};
EntityStage relation_aware_entities(ad::Tape& tape, const GraphStructure& g, ad::Var x_bna,
                                    ad::Var relations, EncoderWeights& w, double leaky_slope);

struct EnhancedStage {
  ad::Var x_out, attention;
};
EnhancedStage enhanced_entities(ad::Tape& tape, const GraphStructure& g, ad::Var x_rel,
                                EncoderWeights& w, double leaky_slope, bool self_features);

EncoderOutput encode(ad::Tape& tape, const GraphStructure& g, ad::Var embeddings,
                     EncoderWeights& w, const HyperParams& hp, const Ablation& ablation);

/// Output width of `encode` for the given settings.
std::size_t output_dim(const HyperParams& hp, const Ablation& ablation);

/// Forward pass only; returns X_out values.
Matrix encode_values(const GraphStructure& g, const Matrix& embeddings, EncoderWeights& w,
                     const HyperParams& hp, const Ablation& ablation);

}  // namespace raga
