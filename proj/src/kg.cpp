#include "raga/kg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace raga {

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& msg)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + msg), line_(line) {}

int IdMap::intern(const std::string& id) {
  auto [it, inserted] = index_.try_emplace(id, static_cast<int>(names_.size()));
  if (inserted) names_.push_back(id);
  return it->second;
}

std::optional<int> IdMap::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

IdMap numbered(std::size_t count) {
  IdMap m;
  for (std::size_t i = 0; i < count; ++i) m.intern(std::to_string(i));
  return m;
}

std::vector<Triple> dedup_in_order(std::vector<Triple> triples, std::size_t n_ent,
                                   std::size_t n_rel) {
  std::set<Triple> seen;
  std::vector<Triple> out;
  out.reserve(triples.size());
  for (const Triple& t : triples) {
    if (t.head < 0 || t.tail < 0 || t.relation < 0 || static_cast<std::size_t>(t.head) >= n_ent ||
        static_cast<std::size_t>(t.tail) >= n_ent || static_cast<std::size_t>(t.relation) >= n_rel) {
      throw std::invalid_argument("KnowledgeGraph: triple index out of range");
    }
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

}  // namespace

KnowledgeGraph::KnowledgeGraph(std::size_t entity_count, std::size_t relation_count,
                               std::vector<Triple> triples)
    : KnowledgeGraph(numbered(entity_count), numbered(relation_count), std::move(triples)) {}

KnowledgeGraph::KnowledgeGraph(IdMap entities, IdMap relations, std::vector<Triple> triples)
    : entities_(std::move(entities)), relations_(std::move(relations)) {
  triples_ = dedup_in_order(std::move(triples), entities_.size(), relations_.size());
}

void AlignmentTask::validate() const {
  auto check_pair = [&](const EntityPair& p, const char* what) {
    if (p.source < 0 || static_cast<std::size_t>(p.source) >= kg1.entity_count() || p.target < 0 ||
        static_cast<std::size_t>(p.target) >= kg2.entity_count()) {
      throw std::invalid_argument(std::string(what) + " pair index out of range");
    }
  };
  std::set<int> src, dst;
  std::set<EntityPair> seed_set;
  for (const auto& p : seeds) {
    check_pair(p, "seed");
    if (!src.insert(p.source).second || !dst.insert(p.target).second) {
      throw std::invalid_argument("seed pairs are not one-to-one");
    }
    seed_set.insert(p);
  }
  for (const auto& p : tests) {
    check_pair(p, "test");
    if (seed_set.count(p) != 0) throw std::invalid_argument("seed and test pairs overlap");
  }
}

double NormalizedAdjacency::at(int i, int j) const {
  const auto lo = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto hi = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  auto it = std::lower_bound(lo, hi, j);
  if (it == hi || *it != j) return 0.0;
  return val[static_cast<std::size_t>(it - col.begin())];
}

NormalizedAdjacency build_normalized_adjacency(const KnowledgeGraph& kg) {
  const std::size_t n = kg.entity_count();
  if (n == 0) throw std::invalid_argument("build_normalized_adjacency: empty graph");

  // A is 0/1, so a self-loop triple sets A(i,i) = 1 and the diagonal of A + I becomes 2.
  std::vector<std::set<int>> adj(n);
  for (const Triple& t : kg.triples()) {
    adj[t.head].insert(t.tail);
    adj[t.tail].insert(t.head);
  }
  std::vector<double> deg(n);
  for (std::size_t i = 0; i < n; ++i) deg[i] = 1.0 + static_cast<double>(adj[i].size());

  NormalizedAdjacency out;
  out.n = n;
  out.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<int> row = adj[i];
    const bool self_loop = row.count(static_cast<int>(i)) != 0;
    row.insert(static_cast<int>(i));
    for (int j : row) {
      const double a = (j == static_cast<int>(i)) ? (self_loop ? 2.0 : 1.0) : 1.0;
      out.col.push_back(j);
      out.val.push_back(a / std::sqrt(deg[i] * deg[static_cast<std::size_t>(j)]));
    }
    out.row_ptr[i + 1] = out.col.size();
  }
  return out;
}

RelationIncidenceIndex build_incidence_index(const KnowledgeGraph& kg) {
  const std::size_t n = kg.entity_count();
  const std::size_t m = kg.relation_count();
  std::vector<std::set<int>> heads(m), tails_of_head(n), heads_of_tail(n), nbrs(n);
  std::map<std::pair<int, int>, std::set<int>> thr, rel_between;
  for (const Triple& t : kg.triples()) {
    heads[t.relation].insert(t.head);
    thr[{t.head, t.relation}].insert(t.tail);
    tails_of_head[t.head].insert(t.tail);
    heads_of_tail[t.tail].insert(t.head);
    rel_between[{t.head, t.tail}].insert(t.relation);
    if (t.head != t.tail) {
      nbrs[t.head].insert(t.tail);
      nbrs[t.tail].insert(t.head);
    }
  }
  auto flatten = [](const std::vector<std::set<int>>& v) {
    std::vector<std::vector<int>> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i].assign(v[i].begin(), v[i].end());
    return out;
  };
  RelationIncidenceIndex idx;
  idx.heads_of_relation = flatten(heads);
  idx.tails_of_head = flatten(tails_of_head);
  idx.heads_of_tail = flatten(heads_of_tail);
  idx.neighbors = flatten(nbrs);
  for (auto& [key, s] : thr) idx.tails_given_head_relation[key].assign(s.begin(), s.end());
  for (auto& [key, s] : rel_between) idx.relations_between[key].assign(s.begin(), s.end());
  return idx;
}

std::vector<Triple> RelationIncidenceIndex::reconstruct_triples() const {
  std::vector<Triple> out;
  for (std::size_t k = 0; k < heads_of_relation.size(); ++k) {
    for (int h : heads_of_relation[k]) {
      for (int t : tails_given_head_relation.at({h, static_cast<int>(k)})) {
        out.push_back({h, static_cast<int>(k), t});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

KnowledgeGraph load_graph(const std::filesystem::path& triple_file) {
  std::ifstream in(triple_file);
  if (!in) throw std::runtime_error("cannot open triple file " + triple_file.string());
  IdMap entities, relations;
  std::vector<Triple> triples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> tok;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) tok.push_back(field);
    if (!line.empty() && line.back() == '\t') tok.emplace_back();
    if (tok.size() != 3 || tok[0].empty() || tok[1].empty() || tok[2].empty()) {
      throw ParseError(triple_file.string(), lineno,
                       "expected 3 tab-separated fields, got " + std::to_string(tok.size()));
    }
    const int h = entities.intern(tok[0]);
    const int r = relations.intern(tok[1]);
    const int t = entities.intern(tok[2]);
    triples.push_back({h, r, t});
  }
  return KnowledgeGraph(std::move(entities), std::move(relations), std::move(triples));
}

}  // namespace raga
