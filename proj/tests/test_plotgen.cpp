#include <doctest.h>

#include <set>

#include "spgnn/errors.hpp"
#include "spgnn/plotgen.hpp"
#include "spgnn/rng.hpp"
#include "test_util.hpp"

using namespace spgnn;

TEST_SUITE_BEGIN("plotgen");

namespace {

LabelVector labels_for(const ApiVocabulary& vocab, const std::vector<std::string>& names) {
  return encode_labels(names, vocab);
}

}  // namespace

TEST_CASE("bar rendering covers a visible share of the axes") {
  ApiVocabulary vocab({"bar", "line"});
  const auto traced =
      render_sample_traced(labels_for(vocab, {"bar"}), vocab, StyleFamily::A, 1234, 64, 64);
  REQUIRE(traced.element_masks.size() == 1);
  int covered = 0;
  for (auto v : traced.element_masks[0]) covered += v;
  CHECK(static_cast<double>(covered) / traced.axes_pixel_area >= 0.03);
}

TEST_CASE("multi-label rendering draws every element inside the axes") {
  ApiVocabulary vocab({"line", "scatter"});
  const auto traced = render_sample_traced(labels_for(vocab, {"line", "scatter"}), vocab,
                                           StyleFamily::A, 777, 64, 64);
  REQUIRE(traced.element_masks.size() == 2);
  for (const auto& mask : traced.element_masks) {
    int covered = 0;
    for (auto v : mask) covered += v;
    CHECK(covered > 0);
  }
}

TEST_CASE("label faithfulness: drawn kinds equal the label set") {
  ApiVocabulary vocab({"bar", "barh", "line", "scatter", "boxplot", "pie", "step",
                       "errorbar", "hist", "stem"});
  Rng rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    LabelVector labels(vocab.size());
    const int k = 1 + static_cast<int>(rng.uniform_int(3));
    for (int t = 0; t < k; ++t) labels.bits[rng.uniform_int(vocab.size())] = 1;
    const auto traced = render_sample_traced(labels, vocab, StyleFamily::B,
                                             9000 + static_cast<std::uint64_t>(trial), 48, 48);
    std::set<std::string> drawn;
    for (const auto& el : traced.trace.elements) drawn.insert(element_api_name(el.kind));
    std::set<std::string> expected;
    for (std::size_t j = 0; j < vocab.size(); ++j) {
      if (labels.bits[j]) expected.insert(vocab.name(j));
    }
    CHECK(drawn == expected);
  }
}

TEST_CASE("identical inputs give identical pixels") {
  ApiVocabulary vocab({"pie", "stem"});
  const auto labels = labels_for(vocab, {"pie", "stem"});
  const Image a = render_sample(labels, vocab, StyleFamily::A, 42, 64, 64);
  const Image b = render_sample(labels, vocab, StyleFamily::A, 42, 64, 64);
  CHECK(a.same_pixels(b));
  const Image c = render_sample(labels, vocab, StyleFamily::A, 43, 64, 64);
  CHECK(!a.same_pixels(c));
}

TEST_CASE("families share geometry but differ in pixels") {
  ApiVocabulary vocab({"bar", "line", "errorbar"});
  const auto labels = labels_for(vocab, {"bar", "errorbar"});
  const auto a = render_sample_traced(labels, vocab, StyleFamily::A, 31337, 64, 64);
  const auto b = render_sample_traced(labels, vocab, StyleFamily::B, 31337, 64, 64);
  CHECK(a.trace == b.trace);
  CHECK(!a.image.same_pixels(b.image));
}

TEST_CASE("generate_corpus hits per-API totals exactly and reproducibly") {
  testutil::TempDir dir("corpus");
  CorpusSpec spec;
  spec.apis = {"bar", "line", "scatter"};
  spec.samples_per_api = {{"bar", 20}, {"line", 20}, {"scatter", 10}};
  spec.max_labels_per_image = 2;
  spec.seed = 7;
  spec.image_height = 48;
  spec.image_width = 48;

  const auto manifest = generate_corpus(spec, dir.path() / "run1");
  std::map<std::string, int> totals;
  int multi_label = 0;
  for (const auto& s : manifest.samples) {
    if (s.labels.count() > 1) ++multi_label;
    for (std::size_t j = 0; j < manifest.vocabulary.size(); ++j) {
      if (s.labels.bits[j]) ++totals[manifest.vocabulary.name(j)];
    }
  }
  CHECK(totals["bar"] == 20);
  CHECK(totals["line"] == 20);
  CHECK(totals["scatter"] == 10);
  CHECK(multi_label > 0);
  CHECK(manifest.size() < 50);  // some samples carry two labels

  // byte-identical rerun
  const auto manifest2 = generate_corpus(spec, dir.path() / "run2");
  CHECK(manifest.content_hash() == manifest2.content_hash());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const Image img1 = load_ppm(manifest.samples[i].image_path);
    const Image img2 = load_ppm(manifest2.samples[i].image_path);
    REQUIRE(img1.same_pixels(img2));
  }

  // reload through the dataset module agrees with the in-memory manifest
  const auto reloaded = DatasetManifest::load(dir.path() / "run1" / "manifest.jsonl",
                                              dir.path() / "run1" / "vocab.txt");
  CHECK(reloaded.content_hash() == manifest.content_hash());
  CHECK(reloaded.metadata.at("family") == "A");
}

TEST_CASE("corpus spec validation") {
  CorpusSpec spec;
  spec.apis = {"bar", "line"};
  spec.samples_per_api = {{"bar", 5}, {"line", 0}};
  CHECK_THROWS_AS(spec.validate(), Error);  // zero count
  spec.samples_per_api["line"] = 5;
  spec.max_labels_per_image = 3;
  CHECK_THROWS_AS(spec.validate(), Error);  // exceeds vocabulary size
  spec.max_labels_per_image = 2;
  spec.validate();

  CorpusSpec unknown;
  unknown.apis = {"bar", "sparkline"};
  unknown.samples_per_api = {{"bar", 5}, {"sparkline", 5}};
  CHECK_THROWS_AS(unknown.validate(), Error);
}

TEST_CASE("corpus spec json round trip") {
  testutil::TempDir dir("spec");
  CorpusSpec spec;
  spec.apis = {"bar", "step", "hist"};
  spec.samples_per_api = {{"bar", 4}, {"step", 3}, {"hist", 2}};
  spec.max_labels_per_image = 2;
  spec.family = StyleFamily::B;
  spec.seed = 99;
  spec.image_height = 32;
  spec.image_width = 40;
  spec.save(dir.path() / "spec.json");
  const auto loaded = CorpusSpec::load(dir.path() / "spec.json");
  CHECK(loaded.apis == spec.apis);
  CHECK(loaded.samples_per_api == spec.samples_per_api);
  CHECK(loaded.family == StyleFamily::B);
  CHECK(loaded.seed == 99);
  CHECK(loaded.image_width == 40);
}

TEST_SUITE_END();
