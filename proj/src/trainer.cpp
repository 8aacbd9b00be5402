#include "spgnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "spgnn/errors.hpp"
#include "spgnn/objective.hpp"
#include "spgnn/rng.hpp"

namespace spgnn {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 1) raise(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) raise(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (alpha < 0.0) raise(ErrorCode::NegativeAlpha, "alpha must be >= 0");
  if (adam.learning_rate <= 0.0) raise(ErrorCode::InvalidArgument, "learning rate must be > 0");
  erase.validate();
}

Adam::Adam(const AdamConfig& config, const SpgnnParameters& params) : config_(config) {
  params.for_each_tensor([this](ParamGroup, const auto& t) {
    m_.emplace_back(Eigen::ArrayXd::Zero(t.size()));
    v_.emplace_back(Eigen::ArrayXd::Zero(t.size()));
  });
}

void Adam::step(SpgnnParameters& params, const SpgnnParameters& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));

  std::size_t idx = 0;
  std::vector<const double*> grad_ptrs;
  std::vector<Eigen::Index> grad_sizes;
  grads.for_each_tensor([&](ParamGroup, const auto& g) {
    grad_ptrs.push_back(g.data());
    grad_sizes.push_back(g.size());
  });
  params.for_each_tensor([&](ParamGroup, auto& t) {
    if (t.size() != grad_sizes[idx]) {
      raise(ErrorCode::ShapeMismatch, "gradient/parameter tensor size mismatch");
    }
    Eigen::Map<const Eigen::ArrayXd> g(grad_ptrs[idx], grad_sizes[idx]);
    Eigen::Map<Eigen::ArrayXd> p(t.data(), t.size());
    auto& m = m_[idx];
    auto& v = v_[idx];
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g.square();
    p -= config_.learning_rate * (m / bc1) / ((v / bc2).sqrt() + config_.epsilon);
    ++idx;
  });
}

// --- checkpoint io ----------------------------------------------------------

namespace {

constexpr char kCkptMagic[8] = {'S', 'P', 'G', 'N', 'C', 'K', 'P', '1'};

json model_config_json(const ModelConfig& cfg) {
  return json{
      {"backbone", cfg.backbone == ModelConfig::Backbone::SmallCnn ? "small-cnn"
                                                                   : "pluggable-external"},
      {"input_height", cfg.input_height},
      {"input_width", cfg.input_width},
      {"feature_dim", cfg.feature_dim},
      {"embedding_dim", cfg.embedding_dim},
      {"relation_hidden", cfg.relation_hidden},
      {"num_apis", cfg.num_apis},
      {"translator_relu", cfg.translator_relu},
      {"init_seed", cfg.init_seed},
      {"backbone_channels", cfg.backbone_channels},
  };
}

ModelConfig model_config_from_ckpt_json(const json& j) {
  ModelConfig cfg;
  const std::string bb = j.value("backbone", "small-cnn");
  cfg.backbone = bb == "pluggable-external" ? ModelConfig::Backbone::PluggableExternal
                                            : ModelConfig::Backbone::SmallCnn;
  cfg.input_height = j.at("input_height").get<int>();
  cfg.input_width = j.at("input_width").get<int>();
  cfg.feature_dim = j.at("feature_dim").get<int>();
  cfg.embedding_dim = j.at("embedding_dim").get<int>();
  cfg.relation_hidden = j.at("relation_hidden").get<int>();
  cfg.num_apis = j.at("num_apis").get<int>();
  cfg.translator_relu = j.at("translator_relu").get<bool>();
  cfg.init_seed = j.at("init_seed").get<std::uint64_t>();
  cfg.backbone_channels = j.value("backbone_channels", std::vector<int>{});
  return cfg;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::MissingFile, "cannot hash " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    if (!in) break;
  }
  return h;
}

}  // namespace

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(ErrorCode::UnwritableOutput, "cannot write checkpoint: " + path.string());
  }
  json header{
      {"version", 1},
      {"model", model_config_json(model)},
      {"vocab", vocab_names},
      {"semantics_hash", semantics_hash},
      {"epoch", epoch},
  };
  const std::string header_bytes = header.dump();
  out.write(kCkptMagic, sizeof(kCkptMagic));
  const std::uint64_t len = header_bytes.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
  params.for_each_tensor([&out](ParamGroup, const auto& t) {
    const std::uint64_t rows = static_cast<std::uint64_t>(t.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(t.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(sizeof(double) * t.size()));
  });
  if (!out) {
    raise(ErrorCode::UnwritableOutput, "short write to " + path.string());
  }
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorCode::MissingFile, "checkpoint not found: " + path.string());
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0) {
    raise(ErrorCode::MalformedRow, "not a checkpoint file: " + path.string());
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header_bytes(len, '\0');
  in.read(header_bytes.data(), static_cast<std::streamsize>(len));
  if (!in) raise(ErrorCode::MalformedRow, "truncated checkpoint header");

  json header;
  try {
    header = json::parse(header_bytes);
  } catch (const json::exception& e) {
    raise(ErrorCode::MalformedRow, std::string("bad checkpoint header: ") + e.what());
  }

  Checkpoint ckpt;
  ckpt.model = model_config_from_ckpt_json(header.at("model"));
  ckpt.vocab_names = header.at("vocab").get<std::vector<std::string>>();
  ckpt.semantics_hash = header.at("semantics_hash").get<std::uint64_t>();
  ckpt.epoch = header.at("epoch").get<int>();
  ckpt.params = init_parameters(ckpt.model);  // allocates the right shapes
  ckpt.params.for_each_tensor([&in, &path](ParamGroup, auto& t) {
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in || rows != static_cast<std::uint64_t>(t.rows()) ||
        cols != static_cast<std::uint64_t>(t.cols())) {
      raise(ErrorCode::ShapeMismatch, "checkpoint tensor shape mismatch in " + path.string());
    }
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(sizeof(double) * t.size()));
    if (!in) raise(ErrorCode::ShapeMismatch, "truncated checkpoint tensors");
  });
  ckpt.fingerprint = hash_file(path);
  return ckpt;
}

void TrainingHistory::save_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    raise(ErrorCode::UnwritableOutput, "cannot write history: " + path.string());
  }
  for (const auto& s : steps) {
    out << json{{"type", "step"},
                {"step", s.step},
                {"l_vis", s.l_vis},
                {"l_sem", s.l_sem},
                {"total", s.total}}
               .dump()
        << "\n";
  }
  for (const auto& ev : evals) {
    json per_api = json::object();
    for (const auto& [name, ap] : ev.report.per_api) per_api[name] = ap;
    out << json{{"type", "eval"},
                {"epoch", ev.epoch},
                {"map", ev.report.map},
                {"per_api", per_api}}
               .dump()
        << "\n";
  }
}

// --- training loop ----------------------------------------------------------

namespace {

std::vector<Image> load_resized_images(const DatasetManifest& manifest, int h, int w) {
  std::vector<Image> images;
  images.reserve(manifest.size());
  for (const auto& sample : manifest.samples) {
    images.push_back(resize(load_ppm(sample.image_path), h, w));
  }
  return images;
}

Eigen::MatrixXd labels_to_targets(const std::vector<const LabelVector*>& labels,
                                  std::size_t c) {
  Eigen::MatrixXd targets(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      targets(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          labels[i]->bits[j];
    }
  }
  return targets;
}

void check_vocab_match(const std::vector<std::string>& a, const std::vector<std::string>& b,
                       const std::string& what) {
  if (a != b) {
    raise(ErrorCode::VocabularyMismatch, what);
  }
}

}  // namespace

TrainResult train(const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const DatasetManifest& train_set, const DatasetManifest& eval_set,
                  const ApiSemanticsMatrix& semantics) {
  model_cfg.validate();
  train_cfg.validate();
  check_vocab_match(train_set.vocabulary.names(), eval_set.vocabulary.names(),
                    "train/eval vocabularies differ");
  check_vocab_match(train_set.vocabulary.names(), semantics.api_names,
                    "semantics matrix does not match the training vocabulary");
  if (model_cfg.num_apis != static_cast<int>(train_set.vocabulary.size())) {
    raise(ErrorCode::VocabularyMismatch, "model num_apis does not match vocabulary size");
  }
  if (semantics.dim() != model_cfg.embedding_dim) {
    raise(ErrorCode::DimensionMismatch, "semantics dimension does not match model config");
  }
  if (train_set.samples.empty()) {
    raise(ErrorCode::InvalidArgument, "empty training set");
  }

  const std::size_t n = train_set.size();
  const std::size_t c = train_set.vocabulary.size();
  const std::vector<Image> base_images =
      load_resized_images(train_set, model_cfg.input_height, model_cfg.input_width);

  SpgnnParameters params = init_parameters(model_cfg);
  SpgnnParameters grads = params;
  Adam optimizer(train_cfg.adam, params);

  AugmentConfig aug;
  aug.enabled = train_cfg.augmentation;
  aug.erase = train_cfg.erase;

  TrainResult result;
  result.best_map = -1.0;
  long step = 0;

  auto make_checkpoint = [&](const SpgnnParameters& p, int epoch) {
    Checkpoint ckpt;
    ckpt.model = model_cfg;
    ckpt.params = p;
    ckpt.vocab_names = train_set.vocabulary.names();
    ckpt.semantics_hash = semantics.content_hash();
    ckpt.epoch = epoch;
    ckpt.fingerprint = parameter_checksum(p);
    return ckpt;
  };

  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = Rng::substream(train_cfg.seed, {fnv1a64("shuffle"),
                                                      static_cast<std::uint64_t>(epoch)});
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
    }

    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(train_cfg.batch_size)) {
      const std::size_t count = std::min<std::size_t>(train_cfg.batch_size, n - start);
      std::vector<Image> batch;
      std::vector<const LabelVector*> batch_labels;
      batch.reserve(count);
      batch_labels.reserve(count);
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t idx = order[start + k];
        // per-sample substream keyed by (epoch, dataset index)
        Rng aug_rng = Rng::substream(train_cfg.seed, {fnv1a64("augment"),
                                                      static_cast<std::uint64_t>(epoch), idx});
        batch.push_back(apply_train_augmentation(base_images[idx], aug, aug_rng));
        batch_labels.push_back(&train_set.samples[idx].labels);
      }

      const Eigen::MatrixXd targets = labels_to_targets(batch_labels, c);
      TrainForward fwd = forward_training(model_cfg, params, batch, semantics);

      Eigen::MatrixXd d_head, d_rel;
      const double l_vis = cross_entropy_from_logits(fwd.head_logits, targets, &d_head);
      const double l_sem = cross_entropy_from_logits(fwd.relation_logits, targets, &d_rel);
      const double total = total_loss(l_vis, l_sem, train_cfg.alpha);
      if (!std::isfinite(total)) {
        raise(ErrorCode::NonFiniteLoss,
              "step " + std::to_string(step) + ": l_vis=" + std::to_string(l_vis) +
                  " l_sem=" + std::to_string(l_sem));
      }
      result.history.steps.push_back(StepRecord{step, l_vis, l_sem, total});

      d_rel *= train_cfg.alpha;  // alpha = 0 zeroes the semantic path exactly
      grads.set_zero();
      backward_training(model_cfg, params, fwd.trace, d_head, d_rel, grads);
      optimizer.step(params, grads);
      ++step;
    }

    const bool last_epoch = epoch + 1 == train_cfg.epochs;
    const bool eval_now = last_epoch || (train_cfg.eval_every_epochs > 0 &&
                                         (epoch + 1) % train_cfg.eval_every_epochs == 0);
    if (eval_now && !eval_set.samples.empty()) {
      Checkpoint probe = make_checkpoint(params, epoch + 1);
      ApReport report = evaluate(probe, eval_set);
      result.history.evals.push_back(EvalRecord{epoch + 1, report});
      if (report.map > result.best_map) {
        result.best_map = report.map;
        result.best_checkpoint = std::move(probe);
      }
    }
  }

  result.final_checkpoint = make_checkpoint(params, train_cfg.epochs);
  if (result.best_map < 0.0) {
    result.best_checkpoint = result.final_checkpoint;
    result.best_map = 0.0;
  }
  return result;
}

Eigen::MatrixXd score_manifest(const Checkpoint& checkpoint, const DatasetManifest& manifest) {
  const std::size_t n = manifest.size();
  const int c = checkpoint.model.num_apis;
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(n), c);
  constexpr std::size_t kEvalBatch = 32;
  for (std::size_t start = 0; start < n; start += kEvalBatch) {
    const std::size_t count = std::min(kEvalBatch, n - start);
    std::vector<Image> batch;
    batch.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      batch.push_back(resize(load_ppm(manifest.samples[start + k].image_path),
                             checkpoint.model.input_height, checkpoint.model.input_width));
    }
    const Eigen::MatrixXd features =
        forward_features(checkpoint.model, checkpoint.params, batch);
    const Eigen::MatrixXd probs = sigmoid(head_logits(checkpoint.params, features));
    for (std::size_t k = 0; k < count; ++k) {
      scores.row(static_cast<Eigen::Index>(start + k)) = probs.col(static_cast<Eigen::Index>(k)).transpose();
    }
  }
  return scores;
}

ApReport evaluate(const Checkpoint& checkpoint, const DatasetManifest& eval_set) {
  check_vocab_match(checkpoint.vocab_names, eval_set.vocabulary.names(),
                    "checkpoint vocabulary does not match the evaluation set");
  const Eigen::MatrixXd scores = score_manifest(checkpoint, eval_set);
  std::vector<LabelVector> labels;
  labels.reserve(eval_set.size());
  for (const auto& s : eval_set.samples) labels.push_back(s.labels);
  return evaluate_map(scores, labels, eval_set.vocabulary);
}

std::vector<std::pair<double, ApReport>> alpha_sweep(
    const ModelConfig& model_cfg, const TrainConfig& train_cfg,
    const DatasetManifest& dataset, const ApiSemanticsMatrix& semantics,
    const std::vector<double>& alphas, double test_fraction) {
  if (alphas.empty()) {
    raise(ErrorCode::InvalidArgument, "alpha sweep needs at least one alpha");
  }
  for (double a : alphas) {
    if (a < 0.0) raise(ErrorCode::NegativeAlpha, "alpha must be >= 0");
  }
  auto [train_set, eval_set] = stratified_split(dataset, test_fraction, train_cfg.seed);

  std::vector<std::pair<double, ApReport>> results;
  for (double a : alphas) {
    TrainConfig cfg = train_cfg;  // shared seeds across alphas
    cfg.alpha = a;
    TrainResult run = train(model_cfg, cfg, train_set, eval_set, semantics);
    results.emplace_back(a, evaluate(run.final_checkpoint, eval_set));
  }
  return results;
}

ApReport cross_family_evaluate(const Checkpoint& checkpoint,
                               const DatasetManifest& eval_set,
                               const std::map<std::string, std::string>& shared_api_map) {
  if (shared_api_map.empty()) {
    raise(ErrorCode::InvalidArgument, "shared API map is empty");
  }
  ApiVocabulary ckpt_vocab(checkpoint.vocab_names);

  // resolve columns up front; order by checkpoint vocabulary index
  std::vector<std::pair<std::size_t, std::size_t>> columns;  // (model col, label col)
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::string>> ordered(shared_api_map.begin(),
                                                           shared_api_map.end());
  std::sort(ordered.begin(), ordered.end(), [&](const auto& x, const auto& y) {
    return ckpt_vocab.index_of(x.first).value_or(SIZE_MAX) <
           ckpt_vocab.index_of(y.first).value_or(SIZE_MAX);
  });
  for (const auto& [src, dst] : ordered) {
    auto src_idx = ckpt_vocab.index_of(src);
    if (!src_idx) {
      raise(ErrorCode::UnmappableApi, "'" + src + "' is not in the checkpoint vocabulary");
    }
    auto dst_idx = eval_set.vocabulary.index_of(dst);
    if (!dst_idx) {
      raise(ErrorCode::UnmappableApi, "'" + dst + "' is not in the evaluation vocabulary");
    }
    columns.emplace_back(*src_idx, *dst_idx);
    names.push_back(src);
  }

  const Eigen::MatrixXd scores = score_manifest(checkpoint, eval_set);
  const std::size_t n = eval_set.size();

  ApReport report;
  std::vector<double> aps;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    std::vector<double> col(n);
    std::vector<int> lab(n);
    int positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(columns[k].first));
      lab[i] = eval_set.samples[i].labels.bits[columns[k].second];
      positives += lab[i];
    }
    if (positives == 0) {
      report.skipped_no_positives.push_back(names[k]);
      continue;
    }
    const double ap = average_precision(col, lab);
    report.per_api.emplace_back(names[k], ap);
    report.positive_counts.emplace_back(names[k], positives);
    aps.push_back(ap);
  }
  report.map = ApReport::mean_ap(aps);
  return report;
}

}  // namespace spgnn
