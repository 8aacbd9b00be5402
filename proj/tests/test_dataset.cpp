#include <doctest.h>

#include <algorithm>
#include <set>

#include "spgnn/dataset.hpp"
#include "spgnn/errors.hpp"
#include "spgnn/rng.hpp"
#include "test_util.hpp"

using namespace spgnn;

TEST_SUITE_BEGIN("dataset");

TEST_CASE("encode_labels basic patterns") {
  ApiVocabulary vocab({"bar", "barh", "plot"});
  CHECK(encode_labels({"bar"}, vocab).bits == std::vector<std::uint8_t>{1, 0, 0});
  CHECK(encode_labels({"plot", "bar"}, vocab).bits == std::vector<std::uint8_t>{1, 0, 1});
  // duplicates collapse to one bit
  CHECK(encode_labels({"bar", "bar"}, vocab).bits == std::vector<std::uint8_t>{1, 0, 0});
  CHECK_THROWS_AS(encode_labels({"sparkline"}, vocab), Error);
  CHECK_THROWS_AS(encode_labels({}, vocab), Error);
}

TEST_CASE("encode/decode round trip over random vocabularies") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = 2 + static_cast<int>(rng.uniform_int(10));
    std::vector<std::string> names;
    for (int j = 0; j < c; ++j) names.push_back("api" + std::to_string(trial) + "_" + std::to_string(j));
    // the vocabulary check rejects digits-only splits? names are valid identifiers
    ApiVocabulary vocab(names);
    std::set<std::string> chosen;
    const int k = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(c)));
    for (int t = 0; t < k; ++t) chosen.insert(names[rng.uniform_int(static_cast<std::uint64_t>(c))]);
    std::vector<std::string> as_list(chosen.begin(), chosen.end());
    const auto decoded = decode_labels(encode_labels(as_list, vocab), vocab);
    CHECK(std::set<std::string>(decoded.begin(), decoded.end()) == chosen);
  }
}

TEST_CASE("vocabulary invariants") {
  CHECK_THROWS_AS(ApiVocabulary({"bar"}), Error);             // c >= 2
  CHECK_THROWS_AS(ApiVocabulary({"bar", "bar"}), Error);      // unique
  CHECK_THROWS_AS(ApiVocabulary({"bar", "Line"}), Error);     // lowercase
  ApiVocabulary vocab({"bar", "line"});
  CHECK(vocab.index_of("line") == 1);
  CHECK(!vocab.index_of("pie"));
}

TEST_CASE("load_manifest happy path and error paths") {
  testutil::TempDir dir("manifest");
  const auto img1 = testutil::write_dummy_image(dir.path(), "img1.ppm");
  const auto img2 = testutil::write_dummy_image(dir.path(), "img2.ppm");
  testutil::write_text(dir.path() / "vocab.txt", "bar\nline\n");

  SUBCASE("two rows load in file order") {
    testutil::write_text(dir.path() / "m.jsonl",
                         R"({"id":"img1","image":"img1.ppm","apis":["bar"]})"
                         "\n"
                         R"({"id":"img2","image":"img2.ppm","apis":["bar","line"]})"
                         "\n");
    const auto manifest = DatasetManifest::load(dir.path() / "m.jsonl", dir.path() / "vocab.txt");
    REQUIRE(manifest.size() == 2);
    CHECK(manifest.vocabulary.size() == 2);
    CHECK(manifest.samples[0].id == "img1");
    CHECK(manifest.samples[1].labels.count() == 2);
  }

  SUBCASE("unknown API is reported by name") {
    testutil::write_text(dir.path() / "bad.jsonl",
                         R"({"id":"img1","image":"img1.ppm","apis":["sparkline"]})"
                         "\n");
    try {
      DatasetManifest::load(dir.path() / "bad.jsonl", dir.path() / "vocab.txt");
      FAIL("expected UnknownApi");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownApi);
      CHECK(std::string(e.what()).find("sparkline") != std::string::npos);
    }
  }

  SUBCASE("empty label set") {
    testutil::write_text(dir.path() / "empty.jsonl",
                         R"({"id":"img1","image":"img1.ppm","apis":[]})"
                         "\n");
    try {
      DatasetManifest::load(dir.path() / "empty.jsonl", dir.path() / "vocab.txt");
      FAIL("expected EmptyLabelSet");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyLabelSet);
    }
  }

  SUBCASE("malformed row reports the line number") {
    testutil::write_text(dir.path() / "mal.jsonl",
                         R"({"id":"img1","image":"img1.ppm","apis":["bar"]})"
                         "\nnot json at all\n");
    try {
      DatasetManifest::load(dir.path() / "mal.jsonl", dir.path() / "vocab.txt");
      FAIL("expected MalformedRow");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedRow);
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }

  SUBCASE("missing files") {
    CHECK_THROWS_AS(DatasetManifest::load(dir.path() / "nope.jsonl", dir.path() / "vocab.txt"),
                    Error);
    testutil::write_text(dir.path() / "m2.jsonl",
                         R"({"id":"x","image":"missing.ppm","apis":["bar"]})"
                         "\n");
    try {
      DatasetManifest::load(dir.path() / "m2.jsonl", dir.path() / "vocab.txt");
      FAIL("expected MissingFile for the image");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingFile);
    }
  }
}

TEST_CASE("manifest save/load round trip keeps ids, labels and metadata") {
  testutil::TempDir dir("roundtrip");
  const auto img = testutil::write_dummy_image(dir.path(), "img.ppm");
  testutil::write_text(dir.path() / "vocab.txt", "bar\nline\n");
  ApiVocabulary vocab({"bar", "line"});
  auto manifest = testutil::make_manifest(vocab, {{"bar"}, {"bar", "line"}}, img);
  manifest.metadata["family"] = "A";
  manifest.save(dir.path() / "m.jsonl");
  const auto loaded = DatasetManifest::load(dir.path() / "m.jsonl", dir.path() / "vocab.txt");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.metadata.at("family") == "A");
  CHECK(loaded.samples[1].labels == manifest.samples[1].labels);
  CHECK(loaded.content_hash() == manifest.content_hash());
}

namespace {

// Imbalanced synthetic manifest mirroring a 13-API distribution at n=6350.
spgnn::DatasetManifest python_plot13_like(const std::filesystem::path& image_path) {
  std::vector<std::string> names = {"bar",   "barh",    "boxplot", "broken_barh", "errorbar",
                                    "hist",  "pie",     "plot",    "polar",       "scatter",
                                    "stackplot", "stem", "step"};
  ApiVocabulary vocab(names);
  // counts sum to 6350 with plot() dominating and broken_barh tiny
  std::vector<int> counts = {900, 180, 420, 10, 230, 520, 260, 2600, 130, 700, 160, 110, 130};
  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < names.size(); ++j) {
    for (int i = 0; i < counts[j]; ++i) rows.push_back({names[j]});
  }
  return testutil::make_manifest(vocab, rows, image_path);
}

}  // namespace

TEST_CASE("stratified_split honors the 80/20 protocol sizes") {
  testutil::TempDir dir("split");
  const auto img = testutil::write_dummy_image(dir.path(), "img.ppm");
  const auto manifest = python_plot13_like(img);
  REQUIRE(manifest.size() == 6350);
  const auto [train, test] = stratified_split(manifest, 0.2, 7);
  CHECK(train.size() == 5080);
  CHECK(test.size() == 1270);
  // disjoint and exhaustive
  std::set<std::string> train_ids, test_ids;
  for (const auto& s : train.samples) train_ids.insert(s.id);
  for (const auto& s : test.samples) test_ids.insert(s.id);
  CHECK(train_ids.size() + test_ids.size() == 6350);
  for (const auto& id : test_ids) CHECK(train_ids.count(id) == 0);
  // every API appears in test
  for (const auto& [name, count] : class_frequency_report(test)) {
    INFO(name);
    CHECK(count >= 1);
  }
}

TEST_CASE("stratified_split is deterministic and errors on starved APIs") {
  testutil::TempDir dir("split2");
  const auto img = testutil::write_dummy_image(dir.path(), "img.ppm");
  ApiVocabulary vocab({"bar", "line", "pie"});
  std::vector<std::vector<std::string>> rows = {{"bar"}, {"bar"}, {"bar"}, {"bar", "line"},
                                                {"line"}, {"line"}, {"bar"}, {"bar"},
                                                {"line"}, {"pie"}};
  const auto manifest = testutil::make_manifest(vocab, rows, img);

  SUBCASE("single-sample API raises unless whitelisted") {
    try {
      stratified_split(manifest, 0.3, 1);
      FAIL("expected InsufficientSamplesForApi");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientSamplesForApi);
      CHECK(std::string(e.what()).find("pie") != std::string::npos);
    }
    const auto [train, test] = stratified_split(manifest, 0.3, 1, {"pie"});
    CHECK(train.size() + test.size() == 10);
  }

  SUBCASE("same seed twice gives identical partitions") {
    const auto [train_a, test_a] = stratified_split(manifest, 0.3, 99, {"pie"});
    const auto [train_b, test_b] = stratified_split(manifest, 0.3, 99, {"pie"});
    CHECK(train_a.content_hash() == train_b.content_hash());
    CHECK(test_a.content_hash() == test_b.content_hash());
    const auto [train_c, test_c] = stratified_split(manifest, 0.3, 100, {"pie"});
    // a different seed is allowed to differ (and does here)
    CHECK(test_a.content_hash() != test_c.content_hash());
  }
}

TEST_CASE("split guarantee property over random imbalanced manifests") {
  testutil::TempDir dir("splitprop");
  const auto img = testutil::write_dummy_image(dir.path(), "img.ppm");
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int c = 2 + static_cast<int>(rng.uniform_int(6));
    std::vector<std::string> names;
    for (int j = 0; j < c; ++j) names.push_back("api_" + std::to_string(j));
    ApiVocabulary vocab(names);
    std::vector<std::vector<std::string>> rows;
    for (int j = 0; j < c; ++j) {
      const int count = 2 + static_cast<int>(rng.uniform_int(40));  // imbalanced
      for (int i = 0; i < count; ++i) {
        std::vector<std::string> labels = {names[static_cast<std::size_t>(j)]};
        if (rng.bernoulli(0.2)) {
          labels.push_back(names[rng.uniform_int(static_cast<std::uint64_t>(c))]);
        }
        rows.push_back(labels);
      }
    }
    const auto manifest = testutil::make_manifest(vocab, rows, img);
    const auto [train, test] = stratified_split(manifest, 0.25, 1000 + trial);
    std::vector<int> test_counts(static_cast<std::size_t>(c), 0);
    for (const auto& s : test.samples) {
      for (int j = 0; j < c; ++j) test_counts[static_cast<std::size_t>(j)] += s.labels.bits[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < c; ++j) {
      INFO("trial " << trial << " api " << j);
      CHECK(test_counts[static_cast<std::size_t>(j)] >= 1);
    }
  }
}

TEST_CASE("class_frequency_report counts and ordering") {
  testutil::TempDir dir("freq");
  const auto img = testutil::write_dummy_image(dir.path(), "img.ppm");
  ApiVocabulary vocab({"bar", "line"});
  const auto manifest =
      testutil::make_manifest(vocab, {{"bar"}, {"bar", "line"}, {"line"}}, img);
  const auto report = class_frequency_report(manifest);
  REQUIRE(report.size() == 2);
  // equal counts keep vocabulary order
  CHECK(report[0] == std::pair<std::string, int>{"bar", 2});
  CHECK(report[1] == std::pair<std::string, int>{"line", 2});
}

TEST_CASE("frequency report reproduces tabulated imbalanced counts") {
  testutil::TempDir dir("freqr");
  const auto img = testutil::write_dummy_image(dir.path(), "img.ppm");
  ApiVocabulary vocab({"bar", "point", "quantile"});
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < 2111; ++i) rows.push_back({"bar"});
  for (int i = 0; i < 3665; ++i) rows.push_back({"point"});
  for (int i = 0; i < 4; ++i) rows.push_back({"quantile"});
  const auto manifest = testutil::make_manifest(vocab, rows, img);
  const auto report = class_frequency_report(manifest);
  REQUIRE(report.size() == 3);
  CHECK(report[0] == std::pair<std::string, int>{"point", 3665});
  CHECK(report[1] == std::pair<std::string, int>{"bar", 2111});
  CHECK(report[2] == std::pair<std::string, int>{"quantile", 4});
}

TEST_SUITE_END();
