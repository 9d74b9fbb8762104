#include "raga/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace raga {
namespace {

std::ifstream open_in(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(std::string("cannot open ") + what + " file " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(std::numeric_limits<double>::max_digits10);
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> tok;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) tok.push_back(field);
  if (!line.empty() && line.back() == '\t') tok.emplace_back();
  return tok;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<EntityPair> load_pairs(const std::filesystem::path& path, const KnowledgeGraph& kg1,
                                   const KnowledgeGraph& kg2) {
  auto in = open_in(path, "pair");
  std::vector<EntityPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (blank(line)) continue;
    const auto tok = split_tabs(line);
    if (tok.size() != 2) {
      throw ParseError(path.string(), lineno,
                       "expected 2 tab-separated fields, got " + std::to_string(tok.size()));
    }
    const auto a = kg1.entities().find(tok[0]);
    const auto b = kg2.entities().find(tok[1]);
    if (!a) throw ParseError(path.string(), lineno, "unknown KG1 entity '" + tok[0] + "'");
    if (!b) throw ParseError(path.string(), lineno, "unknown KG2 entity '" + tok[1] + "'");
    pairs.push_back({*a, *b});
  }
  return pairs;
}

Matrix load_embeddings(const std::filesystem::path& path, KnowledgeGraph& kg) {
  auto in = open_in(path, "embedding");
  std::string line;
  std::size_t lineno = 0;
  std::size_t count = 0, dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> count >> dim) || (hs >> extra) || dim == 0) {
      throw ParseError(path.string(), lineno, "expected header '<count> <dim>'");
    }
    break;
  }
  if (dim == 0) throw ParseError(path.string(), lineno, "missing header");

  std::vector<std::pair<int, std::vector<double>>> rows;
  rows.reserve(count);
  std::vector<bool> seen;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (blank(line)) continue;
    std::istringstream ls(line);
    std::string id;
    ls >> id;
    std::vector<double> v;
    v.reserve(dim);
    std::string tok;
    while (ls >> tok) {
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(x)) {
        throw ParseError(path.string(), lineno, "bad number '" + tok + "'");
      }
      v.push_back(x);
    }
    if (v.size() != dim) {
      throw ParseError(path.string(), lineno,
                       "expected " + std::to_string(dim) + " values, got " + std::to_string(v.size()));
    }
    const int index = kg.add_entity(id);
    if (seen.size() <= static_cast<std::size_t>(index)) seen.resize(static_cast<std::size_t>(index) + 1);
    if (seen[static_cast<std::size_t>(index)]) {
      throw ParseError(path.string(), lineno, "duplicate embedding for '" + id + "'");
    }
    seen[static_cast<std::size_t>(index)] = true;
    rows.emplace_back(index, std::move(v));
  }
  if (rows.size() != count) {
    throw ParseError(path.string(), lineno,
                     "header announces " + std::to_string(count) + " rows, found " +
                         std::to_string(rows.size()));
  }
  Matrix m(kg.entity_count(), dim);
  for (auto& [index, v] : rows) std::copy(v.begin(), v.end(), m.row(static_cast<std::size_t>(index)).begin());
  seen.resize(kg.entity_count());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw std::runtime_error(path.string() + ": no embedding for entity '" +
                               kg.entities().name(static_cast<int>(i)) + "'");
    }
  }
  return m;
}

void write_triples(const std::filesystem::path& path, const KnowledgeGraph& kg) {
  auto out = open_out(path);
  for (const Triple& t : kg.triples()) {
    out << kg.entities().name(t.head) << '\t' << kg.relations().name(t.relation) << '\t'
        << kg.entities().name(t.tail) << '\n';
  }
}

void write_pairs(const std::filesystem::path& path, const std::vector<EntityPair>& pairs,
                 const KnowledgeGraph& kg1, const KnowledgeGraph& kg2) {
  auto out = open_out(path);
  for (const EntityPair& p : pairs)
    out << kg1.entities().name(p.source) << '\t' << kg2.entities().name(p.target) << '\n';
}

void write_embeddings(const std::filesystem::path& path, const Matrix& embeddings,
                      const KnowledgeGraph& kg) {
  if (embeddings.rows() != kg.entity_count()) {
    throw DimensionError("write_embeddings: " + shape_string(embeddings) + " for " +
                         std::to_string(kg.entity_count()) + " entities");
  }
  auto out = open_out(path);
  out << embeddings.rows() << ' ' << embeddings.cols() << '\n';
  for (std::size_t i = 0; i < embeddings.rows(); ++i) {
    out << kg.entities().name(static_cast<int>(i));
    for (double v : embeddings.row(i)) out << ' ' << v;
    out << '\n';
  }
}

void write_alignment(const std::filesystem::path& path, const Alignment& alignment,
                     const KnowledgeGraph& kg1, const KnowledgeGraph& kg2) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < alignment.target_of.size(); ++i) {
    const int t = alignment.target_of[i];
    if (t < 0) continue;
    out << kg1.entities().name(static_cast<int>(i)) << '\t' << kg2.entities().name(t) << '\t'
        << alignment.score[i] << '\t' << method_name(alignment.method) << '\n';
  }
}

Alignment load_alignment(const std::filesystem::path& path, const KnowledgeGraph& kg1,
                         const KnowledgeGraph& kg2) {
  auto in = open_in(path, "alignment");
  Alignment a;
  a.target_of.assign(kg1.entity_count(), -1);
  a.score.assign(kg1.entity_count(), 0.0);
  std::string line;
  std::size_t lineno = 0;
  bool method_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (blank(line)) continue;
    const auto tok = split_tabs(line);
    if (tok.size() != 4) {
      throw ParseError(path.string(), lineno,
                       "expected 4 tab-separated fields, got " + std::to_string(tok.size()));
    }
    const auto s = kg1.entities().find(tok[0]);
    const auto t = kg2.entities().find(tok[1]);
    if (!s || !t) throw ParseError(path.string(), lineno, "unknown entity id");
    if (a.target_of[static_cast<std::size_t>(*s)] >= 0) {
      throw ParseError(path.string(), lineno, "source '" + tok[0] + "' aligned twice");
    }
    a.target_of[static_cast<std::size_t>(*s)] = *t;
    try {
      a.score[static_cast<std::size_t>(*s)] = std::stod(tok[2]);
      const MatchMethod m = parse_method(tok[3]);
      if (method_seen && m != a.method) throw ParseError(path.string(), lineno, "mixed methods");
      a.method = m;
      method_seen = true;
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  std::vector<bool> used(kg2.entity_count(), false);
  for (std::size_t i = 0; i < a.target_of.size(); ++i) {
    if (a.target_of[i] < 0) {
      a.unmatched_sources.push_back(static_cast<int>(i));
    } else {
      used[static_cast<std::size_t>(a.target_of[i])] = true;
    }
  }
  for (std::size_t j = 0; j < used.size(); ++j)
    if (!used[j]) a.unmatched_targets.push_back(static_cast<int>(j));
  return a;
}

}  // namespace raga
