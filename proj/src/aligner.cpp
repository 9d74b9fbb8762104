#include "raga/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace raga {

SimilarityMatrix raw_similarity(const Matrix& x1, const Matrix& x2, int threads) {
  require_shape(x1.cols() == x2.cols(), "raw_similarity", x1, x2);
  SimilarityMatrix s{l1_row_distance(x1, x2, threads), SimilarityKind::Raw};
  for (double& v : s.values.values()) v = -v;
  return s;
}

Matrix row_softmax_component(const Matrix& s) {
  Matrix out(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto r = s.row(i);
    if (r.empty()) continue;
    const double mx = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) z += (out(i, j) = std::exp(r[j] - mx));
    for (std::size_t j = 0; j < r.size(); ++j) out(i, j) /= z;
  }
  return out;
}

Matrix column_softmax_component(const Matrix& s) {
  Matrix out(s.rows(), s.cols());
  if (s.rows() == 0) return out;
  std::vector<double> mx(s.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) mx[j] = std::max(mx[j], s(i, j));
  std::vector<double> z(s.cols(), 0.0);
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) z[j] += (out(i, j) = std::exp(s(i, j) - mx[j]));
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) out(i, j) /= z[j];
  return out;
}

SimilarityMatrix fine_grained(const SimilarityMatrix& raw) {
  SimilarityMatrix out{row_softmax_component(raw.values), SimilarityKind::FineGrained};
  const Matrix col = column_softmax_component(raw.values);
  for (std::size_t k = 0; k < col.size(); ++k) out.values.data()[k] += col.data()[k];
  return out;
}

std::string_view method_name(MatchMethod m) noexcept {
  switch (m) {
    case MatchMethod::Local:
      return "local";
    case MatchMethod::Daa:
      return "daa";
    case MatchMethod::Hungarian:
      return "hungarian";
  }
  return "unknown";
}

MatchMethod parse_method(std::string_view name) {
  if (name == "local") return MatchMethod::Local;
  if (name == "daa") return MatchMethod::Daa;
  if (name == "hungarian") return MatchMethod::Hungarian;
  throw std::invalid_argument("unknown matcher '" + std::string(name) +
                              "' (expected local, daa or hungarian)");
}

std::size_t Alignment::matched() const {
  return static_cast<std::size_t>(
      std::count_if(target_of.begin(), target_of.end(), [](int t) { return t >= 0; }));
}

bool is_injective(const Alignment& a) { return conflict_count(a) == 0; }

std::size_t conflict_count(const Alignment& a) {
  std::vector<int> targets;
  for (int t : a.target_of)
    if (t >= 0) targets.push_back(t);
  std::sort(targets.begin(), targets.end());
  std::size_t conflicts = 0;
  for (std::size_t k = 1; k < targets.size(); ++k) {
    if (targets[k] == targets[k - 1] && (k == 1 || targets[k - 2] != targets[k])) ++conflicts;
  }
  return conflicts;
}

double total_similarity(const Alignment& a, const Matrix& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.target_of.size(); ++i)
    if (a.target_of[i] >= 0) total += s(i, static_cast<std::size_t>(a.target_of[i]));
  return total;
}

namespace {

void finish(Alignment& a, const Matrix& s) {
  a.score.assign(a.target_of.size(), 0.0);
  std::vector<bool> used(s.cols(), false);
  a.unmatched_sources.clear();
  a.unmatched_targets.clear();
  for (std::size_t i = 0; i < a.target_of.size(); ++i) {
    const int t = a.target_of[i];
    if (t < 0) {
      a.unmatched_sources.push_back(static_cast<int>(i));
      continue;
    }
    a.score[i] = s(i, static_cast<std::size_t>(t));
    used[static_cast<std::size_t>(t)] = true;
  }
  for (std::size_t j = 0; j < used.size(); ++j)
    if (!used[j]) a.unmatched_targets.push_back(static_cast<int>(j));
}

}  // namespace

LocalAlignment local_align(const Matrix& s) {
  LocalAlignment out;
  out.alignment.method = MatchMethod::Local;
  out.alignment.target_of.assign(s.rows(), -1);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (s.cols() == 0) break;
    std::size_t best = 0;
    for (std::size_t j = 1; j < s.cols(); ++j)
      if (s(i, j) > s(i, best)) best = j;
    out.alignment.target_of[i] = static_cast<int>(best);
  }
  finish(out.alignment, s);
  std::vector<int> hits(s.cols(), 0);
  for (int t : out.alignment.target_of)
    if (t >= 0) ++hits[static_cast<std::size_t>(t)];
  for (std::size_t j = 0; j < hits.size(); ++j)
    if (hits[j] >= 2) out.conflicted_targets.push_back(static_cast<int>(j));
  return out;
}

Alignment daa_align(const Matrix& s) {
  const std::size_t n = s.rows();
  const std::size_t m = s.cols();
  Alignment a;
  a.method = MatchMethod::Daa;
  a.target_of.assign(n, -1);
  if (n == 0 || m == 0) {
    finish(a, s);
    return a;
  }

  // Preference lists, best first; stable sort keeps lower columns first on ties.
  std::vector<std::vector<int>> prefs(n, std::vector<int>(m));
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(prefs[i].begin(), prefs[i].end(), 0);
    std::stable_sort(prefs[i].begin(), prefs[i].end(),
                     [&](int x, int y) { return s(i, static_cast<std::size_t>(x)) > s(i, static_cast<std::size_t>(y)); });
  }

  std::vector<std::size_t> next(n, 0);
  std::vector<int> holder(m, -1);
  std::vector<int> free_sources;
  for (std::size_t i = n; i-- > 0;) free_sources.push_back(static_cast<int>(i));

  while (!free_sources.empty()) {
    const int i = free_sources.back();
    free_sources.pop_back();
    const auto ui = static_cast<std::size_t>(i);
    while (next[ui] < m) {
      const int j = prefs[ui][next[ui]++];
      const auto uj = static_cast<std::size_t>(j);
      const int incumbent = holder[uj];
      if (incumbent < 0) {
        holder[uj] = i;
        a.target_of[ui] = j;
        break;
      }
      if (s(ui, uj) > s(static_cast<std::size_t>(incumbent), uj)) {
        holder[uj] = i;
        a.target_of[ui] = j;
        a.target_of[static_cast<std::size_t>(incumbent)] = -1;
        free_sources.push_back(incumbent);
        break;
      }
    }
  }
  finish(a, s);
  return a;
}

Alignment hungarian_align(const Matrix& s) {
  Alignment a;
  a.method = MatchMethod::Hungarian;
  a.target_of.assign(s.rows(), -1);
  if (s.rows() == 0 || s.cols() == 0) {
    finish(a, s);
    return a;
  }
  // The shortest-augmenting-path solver below needs rows <= cols.
  const bool flipped = s.rows() > s.cols();
  const Matrix cost_src = flipped ? transpose(s) : s;
  const std::size_t n = cost_src.rows();
  const std::size_t m = cost_src.cols();
  auto cost = [&](std::size_t i, std::size_t j) { return -cost_src(i - 1, j - 1); };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    const std::size_t row = p[j] - 1;
    const std::size_t col = j - 1;
    if (flipped) {
      a.target_of[col] = static_cast<int>(row);
    } else {
      a.target_of[row] = static_cast<int>(col);
    }
  }
  finish(a, s);
  return a;
}

}  // namespace raga
