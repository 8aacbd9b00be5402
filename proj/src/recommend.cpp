#include "spgnn/recommend.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "spgnn/augment.hpp"
#include "spgnn/errors.hpp"

namespace spgnn {

using nlohmann::json;

RecommendResult recommend(const Checkpoint& checkpoint, const Image& image, int k) {
  if (k < 1) {
    raise(ErrorCode::BadK, "k must be >= 1, got " + std::to_string(k));
  }
  validate_image(image);

  const Image input = resize(image, checkpoint.model.input_height, checkpoint.model.input_width);
  const Eigen::MatrixXd features =
      forward_features(checkpoint.model, checkpoint.params, {input});
  const Eigen::VectorXd probs = recommend_head(checkpoint.params, features.col(0));

  const int c = checkpoint.model.num_apis;
  std::vector<int> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;  // deterministic tie-break by vocabulary index
  });

  RecommendResult result;
  result.k = k;
  result.checkpoint_fingerprint = checkpoint.fingerprint;
  const int take = std::min(k, c);
  for (int i = 0; i < take; ++i) {
    result.ranked.emplace_back(checkpoint.vocab_names[static_cast<std::size_t>(order[i])],
                               probs[order[i]]);
  }
  return result;
}

std::string RecommendResult::to_json_string() const {
  json ranked_json = json::array();
  for (const auto& [api, prob] : ranked) {
    ranked_json.push_back(json{{"api", api}, {"probability", prob}});
  }
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(checkpoint_fingerprint));
  return json{{"ranked", ranked_json}, {"k", k}, {"fingerprint", fp}}.dump();
}

}  // namespace spgnn
