#include <doctest.h>

#include <cmath>

#include "spgnn/augment.hpp"
#include "spgnn/errors.hpp"

using namespace spgnn;

TEST_SUITE_BEGIN("augment");

TEST_CASE("resize preserves constants and identity sizes") {
  Image constant(20, 30, 0.42);
  const Image resized = resize(constant, 300, 300);
  CHECK(resized.height == 300);
  CHECK(resized.width == 300);
  for (double v : resized.pixels) CHECK(v == doctest::Approx(0.42).epsilon(1e-12));

  Image original(12, 12);
  for (std::size_t i = 0; i < original.pixels.size(); ++i) {
    original.pixels[i] = static_cast<double>(i % 97) / 96.0;
  }
  const Image same = resize(original, 12, 12);
  CHECK(same.same_pixels(original));

  CHECK_THROWS_AS(resize(constant, 0, 300), Error);
  CHECK_THROWS_AS(resize(constant, 300, 4), Error);
}

TEST_CASE("resize output stays in [0,1]") {
  Image img(16, 16);
  Rng rng(5);
  for (double& v : img.pixels) v = rng.uniform();
  const Image out = resize(img, 11, 23);
  for (double v : out.pixels) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("horizontal flip is an involution and swaps halves") {
  Image img(8, 8, 0.0);
  for (int y = 0; y < 8; ++y) {
    for (int x = 4; x < 8; ++x) {
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = 1.0;  // right half white
    }
  }
  const Image flipped = flip_horizontal(img);
  CHECK(flipped.at(0, 0, 0) == 1.0);
  CHECK(flipped.at(0, 7, 0) == 0.0);
  CHECK(flip_horizontal(flipped).same_pixels(img));
}

TEST_CASE("random_flip is seed-deterministic") {
  Image img(8, 8, 0.0);
  img.at(2, 1, 0) = 1.0;
  std::vector<bool> decisions_a, decisions_b;
  for (int i = 0; i < 32; ++i) {
    Rng rng_a = Rng::substream(7, {static_cast<std::uint64_t>(i)});
    Rng rng_b = Rng::substream(7, {static_cast<std::uint64_t>(i)});
    decisions_a.push_back(random_flip(img, rng_a).same_pixels(img));
    decisions_b.push_back(random_flip(img, rng_b).same_pixels(img));
  }
  CHECK(decisions_a == decisions_b);
  // both outcomes occur
  CHECK(std::count(decisions_a.begin(), decisions_a.end(), true) > 0);
  CHECK(std::count(decisions_a.begin(), decisions_a.end(), false) > 0);
}

TEST_CASE("random_erase p=0 is the identity") {
  Image img(16, 16);
  Rng fill(3);
  for (double& v : img.pixels) v = fill.uniform();
  EraseParams params;
  params.probability = 0.0;
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    CHECK(random_erase(img, params, rng).same_pixels(img));
  }
}

TEST_CASE("forced rectangle erase touches only the rectangle") {
  Image img(16, 16);
  Rng fill(9);
  for (double& v : img.pixels) v = fill.uniform();
  Rng rng(1);
  const Image erased = erase_rect(img, 2, 4, 3, 6, EraseParams::Fill::Mean, rng);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const bool inside = y >= 2 && y < 4 && x >= 3 && x < 6;
      for (int ch = 0; ch < 3; ++ch) {
        if (inside) {
          CHECK(erased.at(y, x, ch) != img.at(y, x, ch));
        } else {
          CHECK(erased.at(y, x, ch) == img.at(y, x, ch));
        }
      }
    }
  }
}

TEST_CASE("erased area fraction always lands in the configured range") {
  EraseParams params;  // defaults: p=0.5, area [0.02,0.33], aspect [0.3,3.33]
  params.probability = 1.0;
  Image img(32, 48, 0.5);
  const double total = 32.0 * 48.0;
  Rng rng(123);
  int erased_count = 0;
  for (int i = 0; i < 10000; ++i) {
    const Image out = random_erase(img, params, rng);
    // reconstruct the rectangle from the diff mask
    int diff = 0;
    for (std::size_t p = 0; p < out.pixels.size(); p += 3) {
      if (out.pixels[p] != 0.5 || out.pixels[p + 1] != 0.5 || out.pixels[p + 2] != 0.5) ++diff;
    }
    if (diff == 0) continue;  // no valid rectangle after 10 attempts
    ++erased_count;
    const double fraction = diff / total;
    CHECK(fraction >= params.area_lo);
    CHECK(fraction <= params.area_hi);
  }
  CHECK(erased_count > 9000);  // the sampler almost always succeeds
}

TEST_CASE("augmentations preserve the value range") {
  Image img(16, 16);
  Rng fill(21);
  for (double& v : img.pixels) v = fill.uniform();
  AugmentConfig cfg;
  for (int i = 0; i < 200; ++i) {
    Rng rng = Rng::substream(99, {static_cast<std::uint64_t>(i)});
    const Image out = apply_train_augmentation(img, cfg, rng);
    for (double v : out.pixels) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("pipeline replays identically for the same substream") {
  Image img(16, 16);
  Rng fill(4);
  for (double& v : img.pixels) v = fill.uniform();
  AugmentConfig cfg;
  for (int epoch = 0; epoch < 3; ++epoch) {
    for (int idx = 0; idx < 8; ++idx) {
      Rng a = Rng::substream(42, {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(idx)});
      Rng b = Rng::substream(42, {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(idx)});
      CHECK(apply_train_augmentation(img, cfg, a).same_pixels(apply_train_augmentation(img, cfg, b)));
    }
  }
  // disabled pipeline is the identity
  AugmentConfig off;
  off.enabled = false;
  Rng rng(0);
  CHECK(apply_train_augmentation(img, off, rng).same_pixels(img));
}

TEST_SUITE_END();
