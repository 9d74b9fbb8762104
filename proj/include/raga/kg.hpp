#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace raga {

/// Malformed input file. what() carries the path and 1-based line number.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& path, std::size_t line, const std::string& msg);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

struct Triple {
  int head = 0;
  int relation = 0;
  int tail = 0;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// String ids <-> dense indices, assigned in first-appearance order.
class IdMap {
public:
  int intern(const std::string& id);
  std::optional<int> find(const std::string& id) const;
  const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

/// Entities, relations and a duplicate-free list of (head, relation, tail)
/// triples over dense indices.
class KnowledgeGraph {
public:
  KnowledgeGraph() = default;
  /// Validates index ranges and drops repeated triples, keeping the first
  /// occurrence. Entity/relation names default to "<index>".
  KnowledgeGraph(std::size_t entity_count, std::size_t relation_count, std::vector<Triple> triples);
  KnowledgeGraph(IdMap entities, IdMap relations, std::vector<Triple> triples);

  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }
  const std::vector<Triple>& triples() const noexcept { return triples_; }
  const IdMap& entities() const noexcept { return entities_; }
  const IdMap& relations() const noexcept { return relations_; }

  /// Registers an entity that has no triples (e.g. one only present in the
  /// embedding file). Returns its index; existing ids keep theirs.
  int add_entity(const std::string& id) { return entities_.intern(id); }

private:
  IdMap entities_;
  IdMap relations_;
  std::vector<Triple> triples_;
};

struct EntityPair {
  int source = 0;
  int target = 0;
  friend auto operator<=>(const EntityPair&, const EntityPair&) = default;
};

struct AlignmentTask {
  KnowledgeGraph kg1;
  KnowledgeGraph kg2;
  std::vector<EntityPair> seeds;
  std::vector<EntityPair> tests;

  /// Checks index ranges, seed injectivity on both sides and seed/test
  /// disjointness. Throws std::invalid_argument.
  void validate() const;
};

/// D^-1/2 (A + I) D^-1/2 in CSR form. A is the undirected 0/1 adjacency of
/// the triples, so the matrix is symmetric with a positive diagonal.
struct NormalizedAdjacency {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;  // size n + 1
  std::vector<int> col;              // sorted within each row
  std::vector<double> val;

  double at(int i, int j) const;
};

NormalizedAdjacency build_normalized_adjacency(const KnowledgeGraph& kg);

/// Set views over the triples. Every inner list is sorted ascending.
struct RelationIncidenceIndex {
  /// heads_of_relation[k]: entities appearing as head of relation k
  std::vector<std::vector<int>> heads_of_relation;
  /// (head, relation) -> tails
  std::map<std::pair<int, int>, std::vector<int>> tails_given_head_relation;
  /// tails_of_head[i]: distinct tails of out-triples of i
  std::vector<std::vector<int>> tails_of_head;
  /// heads_of_tail[j]: distinct heads of in-triples of j
  std::vector<std::vector<int>> heads_of_tail;
  /// (head, tail) -> relations linking them in that direction
  std::map<std::pair<int, int>, std::vector<int>> relations_between;
  /// neighbors[i]: entities linked to i in either direction, excluding i
  std::vector<std::vector<int>> neighbors;

  /// Rebuilds the triple set from heads_of_relation / tails_given_head_relation.
  std::vector<Triple> reconstruct_triples() const;
};

RelationIncidenceIndex build_incidence_index(const KnowledgeGraph& kg);

KnowledgeGraph load_graph(const std::filesystem::path& triple_file);

}  // namespace raga
