#include "spgnn/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "spgnn/errors.hpp"
#include "spgnn/rng.hpp"

namespace spgnn {

using nlohmann::json;

namespace {

bool is_lower_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_')) {
      return false;
    }
  }
  return true;
}

}  // namespace

ApiVocabulary::ApiVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    raise(ErrorCode::InvalidArgument,
          "vocabulary needs at least 2 APIs, got " + std::to_string(names_.size()));
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!is_lower_identifier(names_[i])) {
      raise(ErrorCode::InvalidArgument,
            "API name must be a lowercase identifier: '" + names_[i] + "'");
    }
    auto [it, inserted] = index_.emplace(names_[i], i);
    (void)it;
    if (!inserted) {
      raise(ErrorCode::InvalidArgument, "duplicate API name: '" + names_[i] + "'");
    }
  }
}

ApiVocabulary ApiVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::MissingFile, "vocabulary file not found: " + path.string());
  }
  std::vector<std::string> names;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // trim
    auto begin = line.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r\n");
    std::string name = line.substr(begin, end - begin + 1);
    if (name[0] == '#') continue;
    if (!is_lower_identifier(name)) {
      raise(ErrorCode::MalformedRow,
            path.string() + ":" + std::to_string(line_no) + ": bad API name '" + name + "'");
    }
    names.push_back(std::move(name));
  }
  return ApiVocabulary(std::move(names));
}

std::optional<std::size_t> ApiVocabulary::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int LabelVector::count() const {
  return static_cast<int>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

LabelVector encode_labels(const std::vector<std::string>& api_names,
                          const ApiVocabulary& vocab) {
  if (api_names.empty()) {
    raise(ErrorCode::EmptyLabelSet, "sample has no API labels");
  }
  LabelVector labels(vocab.size());
  for (const auto& name : api_names) {
    auto idx = vocab.index_of(name);
    if (!idx) {
      raise(ErrorCode::UnknownApi, "'" + name + "' is not in the vocabulary");
    }
    labels.bits[*idx] = 1;
  }
  return labels;
}

std::vector<std::string> decode_labels(const LabelVector& labels,
                                       const ApiVocabulary& vocab) {
  if (labels.size() != vocab.size()) {
    raise(ErrorCode::ShapeMismatch, "label vector length does not match vocabulary");
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels.bits[j]) names.push_back(vocab.name(j));
  }
  return names;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& manifest_path,
                                      const std::filesystem::path& vocab_path) {
  ApiVocabulary vocab = ApiVocabulary::load(vocab_path);
  std::ifstream in(manifest_path);
  if (!in) {
    raise(ErrorCode::MissingFile, "manifest file not found: " + manifest_path.string());
  }
  const auto base_dir = manifest_path.parent_path();

  DatasetManifest manifest{std::move(vocab), {}, {}};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      raise(ErrorCode::MalformedRow,
            manifest_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (row.contains("_meta")) {
      for (auto& [k, v] : row["_meta"].items()) {
        manifest.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
      continue;
    }
    if (!row.is_object() || !row.contains("id") || !row.contains("image") ||
        !row.contains("apis") || !row["apis"].is_array()) {
      raise(ErrorCode::MalformedRow, manifest_path.string() + ":" + std::to_string(line_no) +
                                         ": expected {id, image, apis[]}");
    }
    std::vector<std::string> apis;
    for (const auto& a : row["apis"]) apis.push_back(a.get<std::string>());
    if (apis.empty()) {
      raise(ErrorCode::EmptyLabelSet,
            manifest_path.string() + ":" + std::to_string(line_no) + ": empty API list");
    }

    PlotSample sample;
    sample.id = row["id"].get<std::string>();
    std::filesystem::path img = row["image"].get<std::string>();
    if (img.is_relative()) img = base_dir / img;
    sample.image_path = img.string();
    sample.labels = encode_labels(apis, manifest.vocabulary);
    if (!std::filesystem::exists(img)) {
      raise(ErrorCode::MissingFile, "sample '" + sample.id +
                                        "' references missing image: " + img.string());
    }
    manifest.samples.push_back(std::move(sample));
  }
  return manifest;
}

void DatasetManifest::save(const std::filesystem::path& manifest_path) const {
  std::ofstream out(manifest_path);
  if (!out) {
    raise(ErrorCode::UnwritableOutput, "cannot write manifest: " + manifest_path.string());
  }
  if (!metadata.empty()) {
    json meta = json::object();
    for (const auto& [k, v] : metadata) meta[k] = v;
    out << json{{"_meta", meta}}.dump() << "\n";
  }
  const auto base_dir = manifest_path.parent_path();
  for (const auto& s : samples) {
    json row;
    row["id"] = s.id;
    std::filesystem::path img(s.image_path);
    // keep rows relocatable when images sit under the manifest directory
    auto rel = img.lexically_proximate(base_dir);
    row["image"] = (!rel.empty() && rel.native().rfind("..", 0) != 0) ? rel.string()
                                                                      : img.string();
    row["apis"] = decode_labels(s.labels, vocabulary);
    out << row.dump() << "\n";
  }
}

std::uint64_t DatasetManifest::content_hash() const {
  std::uint64_t h = fnv1a64("manifest-v1");
  for (const auto& name : vocabulary.names()) {
    h = fnv1a64(name.data(), name.size(), h);
  }
  for (const auto& s : samples) {
    h = fnv1a64(s.id.data(), s.id.size(), h);
    h = fnv1a64(s.labels.bits.data(), s.labels.bits.size(), h);
  }
  return h;
}

std::pair<DatasetManifest, DatasetManifest> stratified_split(
    const DatasetManifest& manifest, double test_fraction, std::uint64_t seed,
    const std::set<std::string>& train_only) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    raise(ErrorCode::InvalidArgument, "test_fraction must be in (0,1)");
  }
  const std::size_t n = manifest.size();
  const std::size_t c = manifest.vocabulary.size();

  std::vector<int> api_counts(c, 0);
  for (const auto& s : manifest.samples) {
    for (std::size_t j = 0; j < c; ++j) api_counts[j] += s.labels.bits[j];
  }
  for (std::size_t j = 0; j < c; ++j) {
    if (train_only.count(manifest.vocabulary.name(j))) continue;
    if (api_counts[j] < 2) {
      raise(ErrorCode::InsufficientSamplesForApi,
            "API '" + manifest.vocabulary.name(j) + "' has " +
                std::to_string(api_counts[j]) +
                " samples; needs >= 2 or a train-only whitelist entry");
    }
  }

  // round-half-up on the test count
  const std::size_t target_test =
      static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n) + 0.5));

  Rng rng = Rng::substream(seed, {fnv1a64("stratified-split")});
  std::vector<std::uint8_t> in_test(n, 0);
  std::vector<int> test_api_counts(c, 0);
  std::size_t test_count = 0;

  // Reservation pass: rarest API first, ties by vocabulary index.
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return api_counts[a] < api_counts[b];
  });
  for (std::size_t j : order) {
    if (train_only.count(manifest.vocabulary.name(j))) continue;
    if (test_api_counts[j] > 0) continue;  // already covered by a prior reservation
    std::vector<std::size_t> carriers;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_test[i] && manifest.samples[i].labels.bits[j]) carriers.push_back(i);
    }
    if (carriers.empty()) continue;  // count>=2 guaranteed above, all already in test
    const std::size_t pick = carriers[rng.uniform_int(carriers.size())];
    in_test[pick] = 1;
    ++test_count;
    for (std::size_t q = 0; q < c; ++q) {
      test_api_counts[q] += manifest.samples[pick].labels.bits[q];
    }
  }

  // Fill pass: uniform random among the remaining samples.
  std::vector<std::size_t> remaining;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_test[i]) remaining.push_back(i);
  }
  // Fisher-Yates, then take a prefix.
  for (std::size_t i = remaining.size(); i > 1; --i) {
    std::size_t j = rng.uniform_int(i);
    std::swap(remaining[i - 1], remaining[j]);
  }
  for (std::size_t k = 0; k < remaining.size() && test_count < target_test; ++k) {
    in_test[remaining[k]] = 1;
    ++test_count;
  }

  DatasetManifest train{manifest.vocabulary, {}, manifest.metadata};
  DatasetManifest test{manifest.vocabulary, {}, manifest.metadata};
  train.metadata["split"] = "train";
  test.metadata["split"] = "test";
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test : train).samples.push_back(manifest.samples[i]);
  }
  return {std::move(train), std::move(test)};
}

std::vector<std::pair<std::string, int>> class_frequency_report(
    const DatasetManifest& manifest) {
  const std::size_t c = manifest.vocabulary.size();
  std::vector<int> counts(c, 0);
  for (const auto& s : manifest.samples) {
    for (std::size_t j = 0; j < c; ++j) counts[j] += s.labels.bits[j];
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  std::vector<std::pair<std::string, int>> report;
  report.reserve(c);
  for (std::size_t j : order) {
    report.emplace_back(manifest.vocabulary.name(j), counts[j]);
  }
  return report;
}

}  // namespace spgnn
