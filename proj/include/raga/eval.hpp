#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raga/aligner.hpp"
#include "raga/kg.hpp"
#include "raga/matrix.hpp"

namespace raga {

struct MetricsReport {
  std::size_t test_pairs = 0;
  std::map<int, double> hits_at;           // k -> H@k
  std::optional<double> mrr;
  std::optional<double> one_to_one_h1;     // global matchers only
  std::optional<std::size_t> conflict_count;
  std::string direction = "kg1->kg2";

  /// Human-readable table.
  std::string to_table() const;
  /// `key=value` lines, one metric per line (e.g. `hits@1=0.8`).
  std::string to_key_values() const;
};

/// Rank of each test target within its source row, best first. Ties count
/// against the true target when the rival has a lower index.
MetricsReport rank_metrics(const Matrix& s, const std::vector<EntityPair>& tests,
                           const std::vector<int>& ks = {1, 10});

/// Fraction of test pairs whose source is aligned to exactly the expected
/// target. Unmatched sources count as misses. Throws ad::ContractError if the
/// alignment is not one-to-one.
MetricsReport global_metrics(const Alignment& alignment, const std::vector<EntityPair>& tests);

}  // namespace raga
