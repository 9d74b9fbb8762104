#pragma once

#include <filesystem>
#include <vector>

#include "raga/aligner.hpp"
#include "raga/kg.hpp"
#include "raga/matrix.hpp"

namespace raga {

// Text formats:
//   pairs       e1<TAB>e2 per line, ids as in the triple files
//   embeddings  "<count> <dim>" header, then "<entity_id> f1 ... f_dim"
//   alignment   e1<TAB>e2<TAB>score<TAB>method per matched source

/// Resolves ids against the two graphs; unknown ids are a ParseError.
std::vector<EntityPair> load_pairs(const std::filesystem::path& path, const KnowledgeGraph& kg1,
                                   const KnowledgeGraph& kg2);

/// Rows follow kg's entity indices. Ids absent from the triples are added to
/// kg as isolated entities; graph entities without a row are an error.
Matrix load_embeddings(const std::filesystem::path& path, KnowledgeGraph& kg);

void write_triples(const std::filesystem::path& path, const KnowledgeGraph& kg);
void write_pairs(const std::filesystem::path& path, const std::vector<EntityPair>& pairs,
                 const KnowledgeGraph& kg1, const KnowledgeGraph& kg2);
void write_embeddings(const std::filesystem::path& path, const Matrix& embeddings,
                      const KnowledgeGraph& kg);
void write_alignment(const std::filesystem::path& path, const Alignment& alignment,
                     const KnowledgeGraph& kg1, const KnowledgeGraph& kg2);
/// Reads an alignment TSV back into index form (method taken from the file).
Alignment load_alignment(const std::filesystem::path& path, const KnowledgeGraph& kg1,
                         const KnowledgeGraph& kg2);

}  // namespace raga
