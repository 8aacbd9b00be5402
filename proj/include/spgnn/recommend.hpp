#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spgnn/image.hpp"
#include "spgnn/trainer.hpp"

namespace spgnn {

struct RecommendResult {
  // (api, probability) sorted by descending probability, ties by ascending
  // vocabulary index; length min(k, c)
  std::vector<std::pair<std::string, double>> ranked;
  int k = 0;
  std::uint64_t checkpoint_fingerprint = 0;

  /// Canonical JSON form; the CLI prints exactly what the service returns.
  std::string to_json_string() const;
};

/// Test-time top-k path: resize -> features -> head -> sort -> truncate.
RecommendResult recommend(const Checkpoint& checkpoint, const Image& image, int k);

}  // namespace spgnn
