#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "spgnn/augment.hpp"
#include "spgnn/dataset.hpp"
#include "spgnn/metrics.hpp"
#include "spgnn/model.hpp"
#include "spgnn/semantics.hpp"

namespace spgnn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.99;  // "momentum" read as the first-moment coefficient
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  AdamConfig adam;
  double alpha = 1.0;
  bool augmentation = true;  // the +DA switch
  EraseParams erase;
  std::uint64_t seed = 0;
  int eval_every_epochs = 0;  // 0: evaluate once after the final epoch

  void validate() const;
};

class Adam {
 public:
  Adam(const AdamConfig& config, const SpgnnParameters& params);

  void step(SpgnnParameters& params, const SpgnnParameters& grads);

 private:
  AdamConfig config_;
  long t_ = 0;
  std::vector<Eigen::ArrayXd> m_;
  std::vector<Eigen::ArrayXd> v_;
};

/// Versioned container: model config, all four parameter groups, vocabulary
/// and the semantics-matrix hash the model was trained against.
struct Checkpoint {
  ModelConfig model;
  SpgnnParameters params;
  std::vector<std::string> vocab_names;
  std::uint64_t semantics_hash = 0;
  int epoch = 0;
  std::uint64_t fingerprint = 0;  // FNV of the serialized file; fresh = param checksum

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

struct StepRecord {
  long step;
  double l_vis;
  double l_sem;
  double total;

  bool operator==(const StepRecord&) const = default;
};

struct EvalRecord {
  int epoch;
  ApReport report;
};

struct TrainingHistory {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;

  void save_jsonl(const std::filesystem::path& path) const;
};

struct TrainResult {
  Checkpoint final_checkpoint;
  Checkpoint best_checkpoint;  // highest eval mAP seen (final when never better)
  double best_map = 0.0;
  TrainingHistory history;
};

/// Full training loop: augment -> features -> {head, translate -> relate} ->
/// fused loss -> Adam step on (phi, psi, vartheta, omega). Deterministic
/// end-to-end given train_cfg.seed. Aborts with NonFiniteLoss on divergence.
TrainResult train(const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const DatasetManifest& train_set, const DatasetManifest& eval_set,
                  const ApiSemanticsMatrix& semantics);

/// Test-time scores: recommendation-head probabilities only (the relation
/// path is not used at evaluation time). Rows are samples.
Eigen::MatrixXd score_manifest(const Checkpoint& checkpoint, const DatasetManifest& manifest);

ApReport evaluate(const Checkpoint& checkpoint, const DatasetManifest& eval_set);

/// One full train+evaluate per alpha with shared seeds and a shared split.
std::vector<std::pair<double, ApReport>> alpha_sweep(
    const ModelConfig& model_cfg, const TrainConfig& train_cfg,
    const DatasetManifest& dataset, const ApiSemanticsMatrix& semantics,
    const std::vector<double>& alphas, double test_fraction = 0.2);

/// Cross-family evaluation restricted to the shared APIs: model score
/// columns come from the map keys (checkpoint vocabulary), label columns
/// from the map values (eval vocabulary).
ApReport cross_family_evaluate(const Checkpoint& checkpoint,
                               const DatasetManifest& eval_set,
                               const std::map<std::string, std::string>& shared_api_map);

}  // namespace spgnn
