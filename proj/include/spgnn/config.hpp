#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "spgnn/model.hpp"
#include "spgnn/trainer.hpp"

namespace spgnn {

/// Everything a `train` invocation needs, loaded from one JSON config file:
/// model + train hyperparameters, data paths and the output directory.
struct TrainSpec {
  ModelConfig model;
  TrainConfig train;
  std::filesystem::path train_manifest;
  std::filesystem::path vocab;
  std::optional<std::filesystem::path> eval_manifest;  // absent: split internally
  double test_fraction = 0.2;
  std::set<std::string> train_only;  // split whitelist
  std::optional<std::filesystem::path> embeddings;  // absent: name-seeded fallback rows
  std::optional<std::filesystem::path> external_backbone;
  std::filesystem::path out_dir;

  static TrainSpec load(const std::filesystem::path& path);
};

}  // namespace spgnn
