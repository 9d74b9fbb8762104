#include "raga/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "raga/kernels.hpp"

namespace raga::ad {

const Matrix& Var::value() const { return tape->value(id); }

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
  Node n;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, const std::vector<Var>& inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  for (const Var& v : inputs) {
    if (v.tape != this) throw ContractError("operation mixes values from different tapes");
    n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Matrix& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Matrix(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

Matrix Tape::gradient_of(Var v) const {
  const Node& n = nodes_[v.id];
  return n.has_grad ? n.grad : Matrix(n.value.rows(), n.value.cols());
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("backward: value belongs to another tape");
  const Matrix& lv = nodes_[loss.id].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be 1x1, got " + shape_string(lv));
  }
  for (Node& n : nodes_) {
    n.grad = Matrix();
    n.has_grad = false;
    if (n.param != nullptr) n.param->zero_grad();
  }
  grad(loss.id)(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.requires_grad) continue;
    if (n.backward) n.backward(*this, i);
  }
  for (Node& n : nodes_) {
    if (n.param != nullptr && n.has_grad) {
      auto dst = n.param->gradient.values();
      auto src = n.grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

namespace {

void same_tape(Var a, Var b, const char* op) {
  if (a.tape != b.tape) throw ContractError(std::string(op) + ": operands on different tapes");
}

// Applies f elementwise and records df(x, y) as the local derivative.
template <class F, class DF>
Var unary(Var a, F f, DF df) {
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (std::size_t k = 0; k < x.size(); ++k) y.data()[k] = f(x.data()[k]);
  return a.tape->record(std::move(y), {a}, [ia = a.id, df](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& x = t.value(ia);
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Matrix& gx = t.grad(ia);
    for (std::size_t k = 0; k < x.size(); ++k) gx.data()[k] += g.data()[k] * df(x.data()[k], y.data()[k]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape(a, b, "matmul");
  Matrix out = raga::matmul(a.value(), b.value());
  return a.tape->record(std::move(out), {a, b}, [ia = a.id, ib = b.id](Tape& t, std::size_t self) {
    const auto& k = kernels::active();
    const Matrix& A = t.value(ia);
    const Matrix& B = t.value(ib);
    const Matrix& G = t.grad(self);
    if (t.requires_grad(ia)) {
      Matrix& GA = t.grad(ia);
      for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t p = 0; p < A.cols(); ++p)
          GA(i, p) += k.dot(G.row(i).data(), B.row(p).data(), B.cols());
    }
    if (t.requires_grad(ib)) {
      Matrix& GB = t.grad(ib);
      for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t p = 0; p < A.cols(); ++p)
          if (A(i, p) != 0.0) k.axpy(A(i, p), G.row(i).data(), GB.row(p).data(), B.cols());
    }
  });
}

Var add(Var a, Var b) {
  same_tape(a, b, "add");
  require_shape(a.value().same_shape(b.value()), "add", a.value(), b.value());
  Matrix out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] += b.value().data()[k];
  return a.tape->record(std::move(out), {a, b}, [ia = a.id, ib = b.id](Tape& t, std::size_t self) {
    const Matrix& G = t.grad(self);
    for (std::size_t in : {ia, ib}) {
      if (!t.requires_grad(in)) continue;
      Matrix& g = t.grad(in);
      for (std::size_t k = 0; k < G.size(); ++k) g.data()[k] += G.data()[k];
    }
  });
}

Var sub(Var a, Var b) {
  same_tape(a, b, "sub");
  require_shape(a.value().same_shape(b.value()), "sub", a.value(), b.value());
  Matrix out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] -= b.value().data()[k];
  return a.tape->record(std::move(out), {a, b}, [ia = a.id, ib = b.id](Tape& t, std::size_t self) {
    const Matrix& G = t.grad(self);
    if (t.requires_grad(ia)) {
      Matrix& g = t.grad(ia);
      for (std::size_t k = 0; k < G.size(); ++k) g.data()[k] += G.data()[k];
    }
    if (t.requires_grad(ib)) {
      Matrix& g = t.grad(ib);
      for (std::size_t k = 0; k < G.size(); ++k) g.data()[k] -= G.data()[k];
    }
  });
}

Var mul(Var a, Var b) {
  same_tape(a, b, "mul");
  require_shape(a.value().same_shape(b.value()), "mul", a.value(), b.value());
  Matrix out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] *= b.value().data()[k];
  return a.tape->record(std::move(out), {a, b}, [ia = a.id, ib = b.id](Tape& t, std::size_t self) {
    const Matrix& G = t.grad(self);
    const Matrix& A = t.value(ia);
    const Matrix& B = t.value(ib);
    if (t.requires_grad(ia)) {
      Matrix& g = t.grad(ia);
      for (std::size_t k = 0; k < G.size(); ++k) g.data()[k] += G.data()[k] * B.data()[k];
    }
    if (t.requires_grad(ib)) {
      Matrix& g = t.grad(ib);
      for (std::size_t k = 0; k < G.size(); ++k) g.data()[k] += G.data()[k] * A.data()[k];
    }
  });
}

Var add_row(Var a, Var bias) {
  same_tape(a, bias, "add_row");
  const Matrix& A = a.value();
  const Matrix& b = bias.value();
  require_shape(b.rows() == 1 && b.cols() == A.cols(), "add_row", A, b);
  Matrix out = A;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b(0, j);
  return a.tape->record(std::move(out), {a, bias},
                        [ia = a.id, ib = bias.id](Tape& t, std::size_t self) {
                          const Matrix& G = t.grad(self);
                          if (t.requires_grad(ia)) {
                            Matrix& g = t.grad(ia);
                            for (std::size_t k = 0; k < G.size(); ++k) g.data()[k] += G.data()[k];
                          }
                          if (t.requires_grad(ib)) {
                            Matrix& g = t.grad(ib);
                            for (std::size_t i = 0; i < G.rows(); ++i)
                              for (std::size_t j = 0; j < G.cols(); ++j) g(0, j) += G(i, j);
                          }
                        });
}

Var affine(Var a, double scale, double shift) {
  return unary(
      a, [=](double x) { return scale * x + shift; }, [=](double, double) { return scale; });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    same_tape(parts.front(), p, "concat_cols");
    require_shape(p.rows() == rows, "concat_cols", parts.front().value(), p.value());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<std::size_t> ids, offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Matrix& v = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(v.row(i).begin(), v.row(i).end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(off));
    ids.push_back(p.id);
    offsets.push_back(off);
    off += v.cols();
  }
  return parts.front().tape->record(
      std::move(out), parts, [ids, offsets](Tape& t, std::size_t self) {
        const Matrix& G = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!t.requires_grad(ids[k])) continue;
          Matrix& g = t.grad(ids[k]);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += G(i, offsets[k] + j);
        }
      });
}

Var slice_rows(Var a, std::size_t lo, std::size_t hi) {
  const Matrix& A = a.value();
  if (lo > hi || hi > A.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         ") outside " + shape_string(A));
  }
  Matrix out(hi - lo, A.cols());
  std::copy(A.data() + lo * A.cols(), A.data() + hi * A.cols(), out.data());
  return a.tape->record(std::move(out), {a}, [ia = a.id, lo](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& G = t.grad(self);
    Matrix& g = t.grad(ia);
    for (std::size_t k = 0; k < G.size(); ++k) g.data()[lo * g.cols() + k] += G.data()[k];
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.tape->record(Matrix(1, 1, s), {a}, [ia = a.id](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad(self)(0, 0);
    for (double& v : t.grad(ia).values()) v += g;
  });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x >= 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var a, double slope) {
  return unary(
      a, [slope](double x) { return x >= 0.0 ? x : slope * x; },
      [slope](double x, double) { return x >= 0.0 ? 1.0 : slope; });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var row_softmax(Var a) {
  const Matrix& A = a.value();
  Matrix out(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    auto r = A.row(i);
    if (r.empty()) continue;
    const double mx = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) z += (out(i, j) = std::exp(r[j] - mx));
    for (std::size_t j = 0; j < r.size(); ++j) out(i, j) /= z;
  }
  return a.tape->record(std::move(out), {a}, [ia = a.id](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& Y = t.value(self);
    const Matrix& G = t.grad(self);
    Matrix& g = t.grad(ia);
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < Y.rows(); ++i) {
      const double inner = k.dot(Y.row(i).data(), G.row(i).data(), Y.cols());
      for (std::size_t j = 0; j < Y.cols(); ++j) g(i, j) += Y(i, j) * (G(i, j) - inner);
    }
  });
}

Var spmm(const NormalizedAdjacency& adj, Var x) {
  const Matrix& X = x.value();
  if (adj.n != X.rows()) {
    throw DimensionError("spmm: adjacency is " + std::to_string(adj.n) + "x" +
                         std::to_string(adj.n) + ", dense operand " + shape_string(X));
  }
  const auto& k = kernels::active();
  Matrix out(X.rows(), X.cols());
  for (std::size_t i = 0; i < adj.n; ++i)
    for (std::size_t e = adj.row_ptr[i]; e < adj.row_ptr[i + 1]; ++e)
      k.axpy(adj.val[e], X.row(static_cast<std::size_t>(adj.col[e])).data(), out.row(i).data(),
             X.cols());
  return x.tape->record(std::move(out), {x}, [ix = x.id, &adj](Tape& t, std::size_t self) {
    if (!t.requires_grad(ix)) return;
    const auto& k = kernels::active();
    const Matrix& G = t.grad(self);
    Matrix& g = t.grad(ix);
    // The normalised adjacency is symmetric, but the transpose product is
    // written out so the rule holds for any CSR operand.
    for (std::size_t i = 0; i < adj.n; ++i)
      for (std::size_t e = adj.row_ptr[i]; e < adj.row_ptr[i + 1]; ++e)
        k.axpy(adj.val[e], G.row(i).data(), g.row(static_cast<std::size_t>(adj.col[e])).data(),
               G.cols());
  });
}

Var gather_rows(Var x, Index index) {
  const Matrix& X = x.value();
  Matrix out(index->size(), X.cols());
  for (std::size_t e = 0; e < index->size(); ++e) {
    const int r = (*index)[e];
    if (r < 0 || static_cast<std::size_t>(r) >= X.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(r) + " outside " +
                           shape_string(X));
    }
    std::copy(X.row(static_cast<std::size_t>(r)).begin(), X.row(static_cast<std::size_t>(r)).end(),
              out.row(e).begin());
  }
  return x.tape->record(std::move(out), {x}, [ix = x.id, index](Tape& t, std::size_t self) {
    if (!t.requires_grad(ix)) return;
    const auto& k = kernels::active();
    const Matrix& G = t.grad(self);
    Matrix& g = t.grad(ix);
    for (std::size_t e = 0; e < index->size(); ++e)
      k.axpy(1.0, G.row(e).data(), g.row(static_cast<std::size_t>((*index)[e])).data(), G.cols());
  });
}

Var segment_softmax(Var scores, Index segment, std::size_t n_segments) {
  const Matrix& S = scores.value();
  if (S.cols() != 1 || S.rows() != segment->size()) {
    throw DimensionError("segment_softmax: scores " + shape_string(S) + " with " +
                         std::to_string(segment->size()) + " segment ids");
  }
  const std::size_t E = S.rows();
  std::vector<double> mx(n_segments, -std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < E; ++e) {
    const int s = (*segment)[e];
    if (s < 0 || static_cast<std::size_t>(s) >= n_segments) {
      throw DimensionError("segment_softmax: segment id out of range");
    }
    mx[static_cast<std::size_t>(s)] = std::max(mx[static_cast<std::size_t>(s)], S(e, 0));
  }
  std::vector<double> z(n_segments, 0.0);
  Matrix out(E, 1);
  for (std::size_t e = 0; e < E; ++e) {
    const auto s = static_cast<std::size_t>((*segment)[e]);
    out(e, 0) = std::exp(S(e, 0) - mx[s]);
    z[s] += out(e, 0);
  }
  for (std::size_t e = 0; e < E; ++e) out(e, 0) /= z[static_cast<std::size_t>((*segment)[e])];
  return scores.tape->record(
      std::move(out), {scores}, [is = scores.id, segment, n_segments](Tape& t, std::size_t self) {
        if (!t.requires_grad(is)) return;
        const Matrix& Y = t.value(self);
        const Matrix& G = t.grad(self);
        Matrix& g = t.grad(is);
        std::vector<double> inner(n_segments, 0.0);
        for (std::size_t e = 0; e < Y.rows(); ++e)
          inner[static_cast<std::size_t>((*segment)[e])] += Y(e, 0) * G(e, 0);
        for (std::size_t e = 0; e < Y.rows(); ++e)
          g(e, 0) += Y(e, 0) * (G(e, 0) - inner[static_cast<std::size_t>((*segment)[e])]);
      });
}

Var segment_weighted_sum(Var values, Index value_index, Var weights, Index segment,
                         std::size_t n_segments) {
  same_tape(values, weights, "segment_weighted_sum");
  const Matrix& V = values.value();
  const Matrix& W = weights.value();
  const std::size_t E = segment->size();
  if (W.cols() != 1 || W.rows() != E || value_index->size() != E) {
    throw DimensionError("segment_weighted_sum: weights " + shape_string(W) + ", " +
                         std::to_string(value_index->size()) + " value ids, " +
                         std::to_string(E) + " segment ids");
  }
  const auto& k = kernels::active();
  Matrix out(n_segments, V.cols());
  for (std::size_t e = 0; e < E; ++e) {
    const int s = (*segment)[e];
    const int v = (*value_index)[e];
    if (s < 0 || static_cast<std::size_t>(s) >= n_segments || v < 0 ||
        static_cast<std::size_t>(v) >= V.rows()) {
      throw DimensionError("segment_weighted_sum: index out of range");
    }
    k.axpy(W(e, 0), V.row(static_cast<std::size_t>(v)).data(),
           out.row(static_cast<std::size_t>(s)).data(), V.cols());
  }
  return values.tape->record(
      std::move(out), {values, weights},
      [iv = values.id, iw = weights.id, value_index, segment](Tape& t, std::size_t self) {
        const auto& k = kernels::active();
        const Matrix& G = t.grad(self);
        const Matrix& V = t.value(iv);
        const Matrix& W = t.value(iw);
        const std::size_t E = segment->size();
        if (t.requires_grad(iv)) {
          Matrix& gv = t.grad(iv);
          for (std::size_t e = 0; e < E; ++e)
            k.axpy(W(e, 0), G.row(static_cast<std::size_t>((*segment)[e])).data(),
                   gv.row(static_cast<std::size_t>((*value_index)[e])).data(), V.cols());
        }
        if (t.requires_grad(iw)) {
          Matrix& gw = t.grad(iw);
          for (std::size_t e = 0; e < E; ++e)
            gw(e, 0) += k.dot(G.row(static_cast<std::size_t>((*segment)[e])).data(),
                              V.row(static_cast<std::size_t>((*value_index)[e])).data(), V.cols());
        }
      });
}

Var l1_row_distance(Var a, Var b) {
  same_tape(a, b, "l1_row_distance");
  Matrix out = raga::l1_row_distance(a.value(), b.value());
  return a.tape->record(std::move(out), {a, b}, [ia = a.id, ib = b.id](Tape& t, std::size_t self) {
    const auto& k = kernels::active();
    const Matrix& A = t.value(ia);
    const Matrix& B = t.value(ib);
    const Matrix& G = t.grad(self);
    Matrix scratch_a(A.rows(), A.cols());
    Matrix scratch_b(B.rows(), B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < B.rows(); ++j)
        if (G(i, j) != 0.0)
          k.l1_sign_update(A.row(i).data(), B.row(j).data(), G(i, j), scratch_a.row(i).data(),
                           scratch_b.row(j).data(), A.cols());
    if (t.requires_grad(ia)) {
      Matrix& g = t.grad(ia);
      for (std::size_t q = 0; q < g.size(); ++q) g.data()[q] += scratch_a.data()[q];
    }
    if (t.requires_grad(ib)) {
      Matrix& g = t.grad(ib);
      for (std::size_t q = 0; q < g.size(); ++q) g.data()[q] += scratch_b.data()[q];
    }
  });
}

Var pair_l1(Var a, Var b, Index ia_idx, Index ib_idx) {
  same_tape(a, b, "pair_l1");
  const Matrix& A = a.value();
  const Matrix& B = b.value();
  require_shape(A.cols() == B.cols(), "pair_l1", A, B);
  if (ia_idx->size() != ib_idx->size()) throw DimensionError("pair_l1: index lengths differ");
  const auto& k = kernels::active();
  Matrix out(ia_idx->size(), 1);
  for (std::size_t p = 0; p < ia_idx->size(); ++p) {
    const int i = (*ia_idx)[p];
    const int j = (*ib_idx)[p];
    if (i < 0 || static_cast<std::size_t>(i) >= A.rows() || j < 0 ||
        static_cast<std::size_t>(j) >= B.rows()) {
      throw DimensionError("pair_l1: index out of range");
    }
    out(p, 0) = k.l1_distance(A.row(static_cast<std::size_t>(i)).data(),
                              B.row(static_cast<std::size_t>(j)).data(), A.cols());
  }
  return a.tape->record(
      std::move(out), {a, b},
      [ia = a.id, ib = b.id, ia_idx, ib_idx](Tape& t, std::size_t self) {
        const auto& k = kernels::active();
        const Matrix& A = t.value(ia);
        const Matrix& B = t.value(ib);
        const Matrix& G = t.grad(self);
        Matrix scratch_a(A.rows(), A.cols());
        Matrix scratch_b(B.rows(), B.cols());
        for (std::size_t p = 0; p < ia_idx->size(); ++p) {
          if (G(p, 0) == 0.0) continue;
          const auto i = static_cast<std::size_t>((*ia_idx)[p]);
          const auto j = static_cast<std::size_t>((*ib_idx)[p]);
          k.l1_sign_update(A.row(i).data(), B.row(j).data(), G(p, 0), scratch_a.row(i).data(),
                           scratch_b.row(j).data(), A.cols());
        }
        if (t.requires_grad(ia)) {
          Matrix& g = t.grad(ia);
          for (std::size_t q = 0; q < g.size(); ++q) g.data()[q] += scratch_a.data()[q];
        }
        if (t.requires_grad(ib)) {
          Matrix& g = t.grad(ib);
          for (std::size_t q = 0; q < g.size(); ++q) g.data()[q] += scratch_b.data()[q];
        }
      });
}

Var hinge_loss(Var pos, Var neg, Index owner, double margin) {
  same_tape(pos, neg, "hinge_loss");
  const Matrix& P = pos.value();
  const Matrix& N = neg.value();
  if (P.cols() != 1 || N.cols() != 1 || N.rows() != owner->size()) {
    throw DimensionError("hinge_loss: positives " + shape_string(P) + ", negatives " +
                         shape_string(N) + ", " + std::to_string(owner->size()) + " owners");
  }
  double total = 0.0;
  for (std::size_t q = 0; q < N.rows(); ++q) {
    const int o = (*owner)[q];
    if (o < 0 || static_cast<std::size_t>(o) >= P.rows()) {
      throw DimensionError("hinge_loss: owner index out of range");
    }
    total += std::max(P(static_cast<std::size_t>(o), 0) - N(q, 0) + margin, 0.0);
  }
  return pos.tape->record(
      Matrix(1, 1, total), {pos, neg},
      [ip = pos.id, in = neg.id, owner, margin](Tape& t, std::size_t self) {
        const double g = t.grad(self)(0, 0);
        const Matrix& P = t.value(ip);
        const Matrix& N = t.value(in);
        const bool gp = t.requires_grad(ip);
        const bool gn = t.requires_grad(in);
        for (std::size_t q = 0; q < N.rows(); ++q) {
          const auto o = static_cast<std::size_t>((*owner)[q]);
          if (P(o, 0) - N(q, 0) + margin < 0.0) continue;
          if (gp) t.grad(ip)(o, 0) += g;
          if (gn) t.grad(in)(q, 0) -= g;
        }
      });
}

}  // namespace raga::ad
