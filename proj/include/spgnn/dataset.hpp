#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace spgnn {

/// Fixed ordered API set. Order is stable and defines label indexing.
class ApiVocabulary {
 public:
  explicit ApiVocabulary(std::vector<std::string> names);

  /// One lowercase name per line; '#' lines and blank lines are skipped.
  static ApiVocabulary load(const std::filesystem::path& path);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t index) const { return names_[index]; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  bool operator==(const ApiVocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Binary multi-label vector aligned with a vocabulary.
struct LabelVector {
  std::vector<std::uint8_t> bits;

  LabelVector() = default;
  explicit LabelVector(std::size_t c) : bits(c, 0) {}

  std::size_t size() const { return bits.size(); }
  int count() const;
  bool any() const { return count() > 0; }
  bool operator==(const LabelVector& other) const { return bits == other.bits; }
};

/// bit j = 1 iff vocab.names[j] appears in api_names. Duplicates collapse.
LabelVector encode_labels(const std::vector<std::string>& api_names,
                          const ApiVocabulary& vocab);

/// Names of the set bits, in vocabulary order.
std::vector<std::string> decode_labels(const LabelVector& labels,
                                       const ApiVocabulary& vocab);

struct PlotSample {
  std::string id;
  std::string image_path;  // resolved absolute or manifest-relative at load
  LabelVector labels;
};

struct DatasetManifest {
  ApiVocabulary vocabulary;
  std::vector<PlotSample> samples;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return samples.size(); }

  /// Manifest is JSON lines: {"id":..., "image":..., "apis":[...]}.
  /// An optional first line {"_meta":{...}} carries provenance.
  static DatasetManifest load(const std::filesystem::path& manifest_path,
                              const std::filesystem::path& vocab_path);

  void save(const std::filesystem::path& manifest_path) const;

  /// FNV over the serialized rows; used by reproducibility checks.
  std::uint64_t content_hash() const;
};

/// Split honoring the one-test-instance-per-API guarantee: reserve one test
/// sample per API (rarest first, ties by vocabulary index), then fill
/// uniformly at random up to round-half-up(test_fraction * n).
/// APIs listed in train_only are exempt from the guarantee.
std::pair<DatasetManifest, DatasetManifest> stratified_split(
    const DatasetManifest& manifest, double test_fraction, std::uint64_t seed,
    const std::set<std::string>& train_only = {});

/// Per-API positive counts sorted by descending count (ties by vocab index).
std::vector<std::pair<std::string, int>> class_frequency_report(
    const DatasetManifest& manifest);

}  // namespace spgnn
