#include "spgnn/semantics.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "spgnn/errors.hpp"
#include "spgnn/rng.hpp"

namespace spgnn {

const char* semantic_source_name(SemanticSource s) {
  switch (s) {
    case SemanticSource::Direct: return "direct";
    case SemanticSource::Averaged: return "averaged";
    case SemanticSource::Fallback: return "fallback";
  }
  return "?";
}

LoadedEmbeddings load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::MissingFile, "embedding file not found: " + path.string());
  }
  LoadedEmbeddings result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::vector<double> values;
    double v;
    while (row >> v) values.push_back(v);
    if (values.empty()) {
      raise(ErrorCode::InconsistentDimension,
            path.string() + ":" + std::to_string(line_no) + ": no vector values");
    }
    if (result.table.dim == 0) {
      result.table.dim = static_cast<int>(values.size());
    } else if (static_cast<int>(values.size()) != result.table.dim) {
      raise(ErrorCode::InconsistentDimension,
            path.string() + ":" + std::to_string(line_no) + ": expected " +
                std::to_string(result.table.dim) + " values, got " +
                std::to_string(values.size()));
    }
    Eigen::VectorXd vec = Eigen::Map<Eigen::VectorXd>(values.data(),
                                                      static_cast<Eigen::Index>(values.size()));
    auto [it, inserted] = result.table.entries.insert_or_assign(token, std::move(vec));
    (void)it;
    if (!inserted) ++result.duplicate_count;
  }
  if (result.table.entries.empty()) {
    raise(ErrorCode::EmptyTable, "embedding file has no entries: " + path.string());
  }
  return result;
}

std::vector<std::string> tokenize_api_name(const std::string& name) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&]() {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  char prev = '\0';
  for (char c : name) {
    if (c == '_' || std::isdigit(static_cast<unsigned char>(c))) {
      flush();
    } else if (std::isupper(static_cast<unsigned char>(c)) &&
               std::islower(static_cast<unsigned char>(prev))) {
      flush();
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    prev = c;
  }
  flush();
  return tokens;
}

namespace {

Eigen::VectorXd fallback_row(const std::string& api_name, int dim) {
  Rng rng(fnv1a64(api_name) ^ fnv1a64("api-semantics-fallback"));
  Eigen::VectorXd row(dim);
  for (int t = 0; t < dim; ++t) row[t] = rng.normal();
  double norm = row.norm();
  if (norm == 0.0) row.setConstant(1.0 / std::sqrt(static_cast<double>(dim)));
  else row /= norm;
  return row;
}

}  // namespace

ApiSemanticsMatrix build_api_semantics(const ApiVocabulary& vocab,
                                       const WordEmbeddingTable& table) {
  if (table.dim <= 0) {
    raise(ErrorCode::InvalidArgument, "embedding table has no dimension");
  }
  const auto c = static_cast<Eigen::Index>(vocab.size());
  ApiSemanticsMatrix sem;
  sem.matrix.resize(c, table.dim);
  sem.api_names = vocab.names();
  sem.provenance.resize(vocab.size());

  for (Eigen::Index j = 0; j < c; ++j) {
    const std::string& api = vocab.name(static_cast<std::size_t>(j));
    const auto tokens = tokenize_api_name(api);
    bool all_known = !tokens.empty();
    for (const auto& tok : tokens) {
      if (!table.entries.count(tok)) {
        all_known = false;
        break;
      }
    }
    if (all_known) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(table.dim);
      for (const auto& tok : tokens) acc += table.entries.at(tok);
      acc /= static_cast<double>(tokens.size());
      if (acc.norm() == 0.0) {
        // degenerate all-zero embedding; keep the no-zero-row invariant
        sem.matrix.row(j) = fallback_row(api, table.dim).transpose();
        sem.provenance[static_cast<std::size_t>(j)] = SemanticSource::Fallback;
      } else {
        sem.matrix.row(j) = acc.transpose();
        sem.provenance[static_cast<std::size_t>(j)] =
            tokens.size() == 1 ? SemanticSource::Direct : SemanticSource::Averaged;
      }
    } else {
      sem.matrix.row(j) = fallback_row(api, table.dim).transpose();
      sem.provenance[static_cast<std::size_t>(j)] = SemanticSource::Fallback;
    }
  }
  return sem;
}

ApiSemanticsMatrix fallback_semantics(const ApiVocabulary& vocab, int dim) {
  if (dim <= 0) {
    raise(ErrorCode::InvalidArgument, "embedding dimension must be positive");
  }
  WordEmbeddingTable empty;
  empty.dim = dim;
  return build_api_semantics(vocab, empty);
}

std::uint64_t ApiSemanticsMatrix::content_hash() const {
  std::uint64_t h = fnv1a64("api-semantics-v1");
  for (const auto& name : api_names) h = fnv1a64(name.data(), name.size(), h);
  h = fnv1a64(matrix.data(), sizeof(double) * static_cast<std::size_t>(matrix.size()), h);
  return h;
}

}  // namespace spgnn
