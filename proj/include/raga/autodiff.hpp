#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "raga/kg.hpp"
#include "raga/matrix.hpp"

// Tape-based reverse-mode differentiation over dense matrices.
//
// A Tape records every operation as it is evaluated. backward() walks the
// records in reverse and accumulates exact adjoints, then writes the result
// into each Parameter's gradient. Subgradient convention at kinks: relu and
// leaky_relu take the positive-side slope at 0, the hinge is active at 0, and
// |x| has derivative 0 at 0.

namespace raga::ad {

/// Misuse of the differentiation API (e.g. backward on a non-scalar).
class ContractError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class Tape;

/// Handle to a recorded value. Cheap to copy; valid while its Tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

using Index = std::shared_ptr<const std::vector<int>>;

inline Index make_index(std::vector<int> v) {
  return std::make_shared<const std::vector<int>>(std::move(v));
}

class Tape {
public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Registers `p` as a leaf. Calling twice with the same Parameter returns
  /// the same Var, so shared weights accumulate into one gradient.
  Var parameter(Parameter& p);

  /// Records a computed node. `inputs` decide whether it needs a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Matrix value, const std::vector<Var>& inputs, Backward backward);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of node `id`, allocated as zeros on first access.
  Matrix& grad(std::size_t id);
  /// The adjoint of `v` after backward(); zeros if it was never reached.
  Matrix gradient_of(Var v) const;

  /// Zeroes the gradients of every registered Parameter, back-propagates from
  /// the 1x1 node `loss`, and stores the results in Parameter::gradient.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    bool requires_grad = false;
    Parameter* param = nullptr;
    Backward backward;
  };
  std::deque<Node> nodes_;  // deque: value() references survive appends
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

// Dense algebra
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
/// a + bias, where bias is 1 x cols(a) and broadcast over rows.
Var add_row(Var a, Var bias);
/// scale * a + shift, elementwise.
Var affine(Var a, double scale, double shift);
Var concat_cols(const std::vector<Var>& parts);
/// Rows [lo, hi) of a.
Var slice_rows(Var a, std::size_t lo, std::size_t hi);
/// 1x1 sum of all entries.
Var sum(Var a);

// Activations
Var relu(Var a);
Var leaky_relu(Var a, double slope);
Var sigmoid(Var a);
/// Softmax of each row, computed after subtracting the row maximum.
Var row_softmax(Var a);

// Graph operations
/// adj * x. `adj` must outlive the tape.
Var spmm(const NormalizedAdjacency& adj, Var x);
/// out.row(e) = x.row(index[e]).
Var gather_rows(Var x, Index index);
/// Softmax of the column vector `scores` within each group: entries e with
/// equal segment[e] form one normalisation group.
Var segment_softmax(Var scores, Index segment, std::size_t n_segments);
/// out.row(segment[e]) += weights(e) * values.row(value_index[e]); rows of
/// segments with no entries stay zero.
Var segment_weighted_sum(Var values, Index value_index, Var weights, Index segment,
                         std::size_t n_segments);

// Distances and loss
/// Pairwise Manhattan distance matrix between the rows of a and b.
Var l1_row_distance(Var a, Var b);
/// Column vector d(p) = |a.row(ia[p]) - b.row(ib[p])|_1.
Var pair_l1(Var a, Var b, Index ia, Index ib);
/// sum_q max(pos(owner[q]) - neg(q) + margin, 0) as a 1x1 value.
Var hinge_loss(Var pos, Var neg, Index owner, double margin);

}  // namespace raga::ad
