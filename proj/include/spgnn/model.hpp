#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "spgnn/image.hpp"
#include "spgnn/semantics.hpp"

namespace spgnn {

/// Batch convention throughout the model: matrices hold one sample per
/// column, so a feature batch is (feature_dim x B), predictions are (c x B).
struct ModelConfig {
  enum class Backbone { SmallCnn, PluggableExternal };

  Backbone backbone = Backbone::SmallCnn;
  int input_height = 300;
  int input_width = 300;
  int feature_dim = 1536;
  int embedding_dim = 400;
  int relation_hidden = 256;
  int num_apis = 0;
  bool translator_relu = true;  // ablation switch; on by default
  std::uint64_t init_seed = 0;
  std::vector<int> backbone_channels;  // empty: derived from feature_dim

  std::vector<int> resolved_channels() const;
  void validate() const;
};

struct LinearParam {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

struct ConvParam {
  Eigen::MatrixXd weight;  // out_channels x (in_channels * 9), 3x3 kernels
  Eigen::VectorXd bias;
  int in_channels = 0;
  int out_channels = 0;
};

enum class ParamGroup { Phi, Psi, Vartheta, Omega };

/// The four learnable groups: backbone phi, translator psi, relation net
/// vartheta, recommendation head omega. Also reused as a gradient holder.
struct SpgnnParameters {
  std::vector<ConvParam> phi;
  LinearParam psi;           // (c*e) x d_f
  LinearParam relation_fc1;  // hidden x 2e
  LinearParam relation_fc2;  // 1 x hidden
  LinearParam omega;         // c x d_f

  /// Visits every tensor in a fixed order as f(group, dense). Used by the
  /// optimizer, checkpointing and the finite-difference harness.
  template <typename F>
  void for_each_tensor(F&& f) {
    for (auto& layer : phi) {
      f(ParamGroup::Phi, layer.weight);
      f(ParamGroup::Phi, layer.bias);
    }
    f(ParamGroup::Psi, psi.weight);
    f(ParamGroup::Psi, psi.bias);
    f(ParamGroup::Vartheta, relation_fc1.weight);
    f(ParamGroup::Vartheta, relation_fc1.bias);
    f(ParamGroup::Vartheta, relation_fc2.weight);
    f(ParamGroup::Vartheta, relation_fc2.bias);
    f(ParamGroup::Omega, omega.weight);
    f(ParamGroup::Omega, omega.bias);
  }

  template <typename F>
  void for_each_tensor(F&& f) const {
    const_cast<SpgnnParameters*>(this)->for_each_tensor(
        [&](ParamGroup g, auto& t) { f(g, const_cast<const decltype(t)&>(t)); });
  }

  void set_zero();
};

SpgnnParameters init_parameters(const ModelConfig& config);

/// Variant honoring the pluggable-backbone contract: phi comes from a weight
/// file written by save_backbone_weights. Throws ShapeMismatch when the file
/// disagrees with the configured topology.
SpgnnParameters init_parameters(const ModelConfig& config,
                                const std::filesystem::path& external_phi);

void save_backbone_weights(const SpgnnParameters& params,
                           const std::filesystem::path& path);

std::uint64_t parameter_checksum(const SpgnnParameters& params);

/// Per-layer activations kept for the backward pass.
struct ConvTrace {
  Eigen::MatrixXd input;   // in_ch x (B * h_in * w_in)
  Eigen::MatrixXd cols;    // (in_ch*9) x (B * h_out * w_out)
  Eigen::MatrixXd output;  // out_ch x (B * h_out * w_out), post-ReLU
  int h_in = 0, w_in = 0, h_out = 0, w_out = 0;
};

struct BatchTrace {
  int batch = 0;
  std::vector<ConvTrace> conv;
  Eigen::MatrixXd features;         // d_f x B
  Eigen::MatrixXd translated_pre;   // (c*e) x B, pre-ReLU
  Eigen::MatrixXd translated;       // (c*e) x B
  Eigen::MatrixXd relation_input;   // 2e x (B*c)
  Eigen::MatrixXd relation_hidden;  // hidden x (B*c), post-ReLU
};

// --- forward contracts -----------------------------------------------------

/// Backbone: strided 3x3 conv blocks with ReLU, global average pooling over
/// the last map. Throws WrongInputSize if an image does not match the config.
Eigen::MatrixXd forward_features(const ModelConfig& config, const SpgnnParameters& params,
                                 const std::vector<Image>& images,
                                 BatchTrace* trace = nullptr);

Eigen::MatrixXd head_logits(const SpgnnParameters& params, const Eigen::MatrixXd& features);
Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& logits);

/// One affine layer + sigmoid over a single feature vector.
Eigen::VectorXd recommend_head(const SpgnnParameters& params, const Eigen::VectorXd& feature);

/// Affine d_f -> c*e (+ ReLU) for the whole batch; rows are API-major
/// (row j*e + t is component t of API j's estimate).
Eigen::MatrixXd translate_batch(const ModelConfig& config, const SpgnnParameters& params,
                                const Eigen::MatrixXd& features, BatchTrace* trace = nullptr);

/// Per-sample semantic estimate, reshaped to (c x e).
Eigen::MatrixXd translate_semantics(const ModelConfig& config, const SpgnnParameters& params,
                                    const Eigen::VectorXd& feature);

struct RelationScores {
  Eigen::VectorXd raw;         // s, length c
  Eigen::VectorXd normalized;  // sigmoid(s)
};

/// Weight-shared comparator: for each API j, [v_j ; v_hat_j] -> MLP
/// (2e -> hidden -> 1, ReLU between) -> s_j. Throws DimensionMismatch when
/// V and V_hat disagree or do not fit the relation net input width.
RelationScores relation_scores(const SpgnnParameters& params, const ApiSemanticsMatrix& semantics,
                               const Eigen::MatrixXd& estimate /* c x e */);

/// Batched relation logits (c x B) over translated estimates for a batch.
Eigen::MatrixXd relation_logits_batch(const ModelConfig& config, const SpgnnParameters& params,
                                      const ApiSemanticsMatrix& semantics,
                                      const Eigen::MatrixXd& translated,
                                      BatchTrace* trace = nullptr);

// --- training --------------------------------------------------------------

struct TrainForward {
  BatchTrace trace;
  Eigen::MatrixXd head_logits;      // c x B
  Eigen::MatrixXd relation_logits;  // c x B
};

TrainForward forward_training(const ModelConfig& config, const SpgnnParameters& params,
                              const std::vector<Image>& images,
                              const ApiSemanticsMatrix& semantics);

/// Accumulates dL/dparams into grads (which must be zeroed, shape-matched)
/// given upstream gradients w.r.t. the two logit blocks.
void backward_training(const ModelConfig& config, const SpgnnParameters& params,
                       const BatchTrace& trace, const Eigen::MatrixXd& d_head_logits,
                       const Eigen::MatrixXd& d_relation_logits, SpgnnParameters& grads);

}  // namespace spgnn
