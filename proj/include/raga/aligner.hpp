#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "raga/matrix.hpp"

namespace raga {

enum class SimilarityKind { Raw, FineGrained };

struct SimilarityMatrix {
  Matrix values;  // |E1| x |E2|, larger is more similar
  SimilarityKind kind = SimilarityKind::Raw;
};

/// S(i, j) = -|x1_i - x2_j|_1.
SimilarityMatrix raw_similarity(const Matrix& x1, const Matrix& x2, int threads = 1);

/// exp(S(i,j)) / sum_j' exp(S(i,j')), max-shifted per row.
Matrix row_softmax_component(const Matrix& s);
/// exp(S(i,j)) / sum_i' exp(S(i',j)), max-shifted per column.
Matrix column_softmax_component(const Matrix& s);
/// Sum of the two components above: bidirectional match confidence in (0, 2).
SimilarityMatrix fine_grained(const SimilarityMatrix& raw);

enum class MatchMethod { Local, Daa, Hungarian };

std::string_view method_name(MatchMethod m) noexcept;
/// Parses "local" / "daa" / "hungarian"; throws std::invalid_argument.
MatchMethod parse_method(std::string_view name);

/// A mapping from source (KG1) to target (KG2) entities.
struct Alignment {
  MatchMethod method = MatchMethod::Local;
  std::vector<int> target_of;       // -1 when the source is unmatched
  std::vector<double> score;        // similarity of the chosen pair, 0 if unmatched
  std::vector<int> unmatched_sources;
  std::vector<int> unmatched_targets;

  std::size_t matched() const;
};

/// No target is used by two sources.
bool is_injective(const Alignment& a);
/// Number of targets chosen by two or more sources.
std::size_t conflict_count(const Alignment& a);
/// Sum of S over matched pairs.
double total_similarity(const Alignment& a, const Matrix& s);

struct LocalAlignment {
  Alignment alignment;
  std::vector<int> conflicted_targets;  // ascending
};

/// Row-wise argmax, lowest column on ties. May be many-to-one.
LocalAlignment local_align(const Matrix& s);

/// Deferred acceptance with sources proposing in order of descending score
/// (lower column first on ties). A target keeps its current proposer unless a
/// new one scores strictly higher. Yields a stable one-to-one matching of
/// size min(|E1|, |E2|).
Alignment daa_align(const Matrix& s);

/// Maximum-total-similarity one-to-one matching of size min(|E1|, |E2|).
Alignment hungarian_align(const Matrix& s);

}  // namespace raga
