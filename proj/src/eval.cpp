#include "raga/eval.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "raga/autodiff.hpp"

namespace raga {

MetricsReport rank_metrics(const Matrix& s, const std::vector<EntityPair>& tests,
                           const std::vector<int>& ks) {
  for (int k : ks)
    if (k < 1) throw std::invalid_argument("rank_metrics: k must be >= 1");
  MetricsReport r;
  r.test_pairs = tests.size();
  std::map<int, std::size_t> hits;
  for (int k : ks) hits[k] = 0;
  double rr = 0.0;
  for (const EntityPair& p : tests) {
    if (p.source < 0 || static_cast<std::size_t>(p.source) >= s.rows() || p.target < 0 ||
        static_cast<std::size_t>(p.target) >= s.cols()) {
      throw std::invalid_argument("rank_metrics: test pair (" + std::to_string(p.source) + ", " +
                                  std::to_string(p.target) + ") outside " + shape_string(s));
    }
    const auto row = s.row(static_cast<std::size_t>(p.source));
    const double truth = row[static_cast<std::size_t>(p.target)];
    std::size_t rank = 1;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] > truth || (row[j] == truth && j < static_cast<std::size_t>(p.target))) ++rank;
    }
    for (auto& [k, count] : hits)
      if (rank <= static_cast<std::size_t>(k)) ++count;
    rr += 1.0 / static_cast<double>(rank);
  }
  const double n = static_cast<double>(tests.size());
  for (const auto& [k, count] : hits) r.hits_at[k] = tests.empty() ? 0.0 : count / n;
  r.mrr = tests.empty() ? 0.0 : rr / n;
  return r;
}

MetricsReport global_metrics(const Alignment& alignment, const std::vector<EntityPair>& tests) {
  if (!is_injective(alignment)) {
    throw ad::ContractError("global_metrics: alignment is not one-to-one");
  }
  MetricsReport r;
  r.test_pairs = tests.size();
  std::size_t hits = 0;
  for (const EntityPair& p : tests) {
    if (p.source < 0 || static_cast<std::size_t>(p.source) >= alignment.target_of.size()) {
      throw std::invalid_argument("global_metrics: test source out of range");
    }
    if (alignment.target_of[static_cast<std::size_t>(p.source)] == p.target) ++hits;
  }
  r.one_to_one_h1 = tests.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(tests.size());
  r.conflict_count = 0;
  return r;
}

std::string MetricsReport::to_table() const {
  std::ostringstream out;
  char buf[64];
  out << "direction   " << direction << "\n";
  out << "test pairs  " << test_pairs << "\n";
  for (const auto& [k, v] : hits_at) {
    std::snprintf(buf, sizeof buf, "H@%-9d %6.2f%%\n", k, 100.0 * v);
    out << buf;
  }
  if (mrr) {
    std::snprintf(buf, sizeof buf, "MRR        %7.4f\n", *mrr);
    out << buf;
  }
  if (one_to_one_h1) {
    std::snprintf(buf, sizeof buf, "1-to-1 H@1 %6.2f%%\n", 100.0 * *one_to_one_h1);
    out << buf;
  }
  if (conflict_count) out << "conflicts  " << *conflict_count << "\n";
  return out.str();
}

std::string MetricsReport::to_key_values() const {
  std::ostringstream out;
  out.precision(17);
  out << "direction=" << direction << "\n";
  out << "test_pairs=" << test_pairs << "\n";
  for (const auto& [k, v] : hits_at) out << "hits@" << k << "=" << v << "\n";
  if (mrr) out << "mrr=" << *mrr << "\n";
  if (one_to_one_h1) out << "one_to_one_h1=" << *one_to_one_h1 << "\n";
  if (conflict_count) out << "conflict_count=" << *conflict_count << "\n";
  return out.str();
}

}  // namespace raga
