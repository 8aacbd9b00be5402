#include "spgnn/config.hpp"

#include <fstream>

#include <json.hpp>

#include "spgnn/errors.hpp"

namespace spgnn {

using nlohmann::json;

namespace {

ModelConfig parse_model(const json& j) {
  ModelConfig cfg;
  const std::string backbone = j.value("backbone", "small-cnn");
  if (backbone == "small-cnn") {
    cfg.backbone = ModelConfig::Backbone::SmallCnn;
  } else if (backbone == "pluggable-external") {
    cfg.backbone = ModelConfig::Backbone::PluggableExternal;
  } else {
    raise(ErrorCode::InvalidArgument, "unknown backbone '" + backbone + "'");
  }
  cfg.input_height = j.value("input_height", 300);
  cfg.input_width = j.value("input_width", 300);
  cfg.feature_dim = j.value("feature_dim", 1536);
  cfg.embedding_dim = j.value("embedding_dim", 400);
  cfg.relation_hidden = j.value("relation_hidden", 256);
  cfg.num_apis = j.value("num_apis", 0);  // 0: filled from the vocabulary
  cfg.translator_relu = j.value("translator_relu", true);
  cfg.init_seed = j.value("init_seed", std::uint64_t{0});
  cfg.backbone_channels = j.value("backbone_channels", std::vector<int>{});
  return cfg;
}

TrainConfig parse_train(const json& j) {
  TrainConfig cfg;
  cfg.epochs = j.value("epochs", 100);
  cfg.batch_size = j.value("batch_size", 32);
  cfg.adam.learning_rate = j.value("learning_rate", 1e-3);
  cfg.adam.beta1 = j.value("beta1", 0.99);
  cfg.adam.beta2 = j.value("beta2", 0.999);
  cfg.adam.epsilon = j.value("epsilon", 1e-8);
  cfg.alpha = j.value("alpha", 1.0);
  cfg.augmentation = j.value("augmentation", true);
  if (j.contains("erase")) {
    const json& e = j["erase"];
    cfg.erase.probability = e.value("probability", cfg.erase.probability);
    cfg.erase.area_lo = e.value("area_lo", cfg.erase.area_lo);
    cfg.erase.area_hi = e.value("area_hi", cfg.erase.area_hi);
    cfg.erase.aspect_lo = e.value("aspect_lo", cfg.erase.aspect_lo);
    cfg.erase.aspect_hi = e.value("aspect_hi", cfg.erase.aspect_hi);
    const std::string fill = e.value("fill", "uniform-random");
    if (fill == "uniform-random") {
      cfg.erase.fill = EraseParams::Fill::UniformRandom;
    } else if (fill == "mean") {
      cfg.erase.fill = EraseParams::Fill::Mean;
    } else {
      raise(ErrorCode::InvalidArgument, "erase fill must be uniform-random or mean");
    }
  }
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.eval_every_epochs = j.value("eval_every_epochs", 0);
  return cfg;
}

}  // namespace

TrainSpec TrainSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::MissingFile, "config file not found: " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    raise(ErrorCode::MalformedRow, path.string() + ": " + e.what());
  }

  TrainSpec spec;
  try {
    spec.model = parse_model(j.value("model", json::object()));
    spec.train = parse_train(j.value("train", json::object()));
    const json& data = j.at("data");
    const auto base = path.parent_path();
    auto resolve = [&base](const std::string& p) {
      std::filesystem::path fp(p);
      return fp.is_relative() ? base / fp : fp;
    };
    spec.train_manifest = resolve(data.at("train_manifest").get<std::string>());
    spec.vocab = resolve(data.at("vocab").get<std::string>());
    if (data.contains("eval_manifest") && !data["eval_manifest"].is_null()) {
      spec.eval_manifest = resolve(data["eval_manifest"].get<std::string>());
    }
    spec.test_fraction = data.value("test_fraction", 0.2);
    if (data.contains("train_only")) {
      for (const auto& name : data["train_only"]) {
        spec.train_only.insert(name.get<std::string>());
      }
    }
    if (data.contains("embeddings") && !data["embeddings"].is_null()) {
      spec.embeddings = resolve(data["embeddings"].get<std::string>());
    }
    if (data.contains("external_backbone") && !data["external_backbone"].is_null()) {
      spec.external_backbone = resolve(data["external_backbone"].get<std::string>());
    }
    spec.out_dir = resolve(j.value("out_dir", std::string("runs/default")));
  } catch (const json::exception& e) {
    raise(ErrorCode::MalformedRow, path.string() + ": " + e.what());
  }
  return spec;
}

}  // namespace spgnn
