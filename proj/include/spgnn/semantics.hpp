#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "spgnn/dataset.hpp"

namespace spgnn {

struct WordEmbeddingTable {
  int dim = 0;
  std::unordered_map<std::string, Eigen::VectorXd> entries;
};

struct LoadedEmbeddings {
  WordEmbeddingTable table;
  int duplicate_count = 0;  // tokens that appeared more than once (last wins)
};

/// Text format: "token v1 ... v_e" per line, consistent e across lines.
LoadedEmbeddings load_embeddings(const std::filesystem::path& path);

enum class SemanticSource { Direct, Averaged, Fallback };

const char* semantic_source_name(SemanticSource s);

/// Ground-truth API semantic matrix V, one row per API in vocabulary order.
struct ApiSemanticsMatrix {
  Eigen::MatrixXd matrix;  // c x e
  std::vector<std::string> api_names;
  std::vector<SemanticSource> provenance;

  std::size_t num_apis() const { return api_names.size(); }
  int dim() const { return static_cast<int>(matrix.cols()); }
  std::uint64_t content_hash() const;
};

/// Splits on underscores, digit runs and camelCase boundaries, lowercased.
std::vector<std::string> tokenize_api_name(const std::string& name);

/// Rows: mean of token embeddings when all tokens are known (Direct for a
/// single token, Averaged otherwise); a unit-norm pseudo-random vector seeded
/// by the API name when any token is missing (Fallback).
ApiSemanticsMatrix build_api_semantics(const ApiVocabulary& vocab,
                                       const WordEmbeddingTable& table);

/// Stand-in when no embedding file is supplied: every API gets its
/// name-seeded fallback row at the requested dimension.
ApiSemanticsMatrix fallback_semantics(const ApiVocabulary& vocab, int dim);

}  // namespace spgnn
