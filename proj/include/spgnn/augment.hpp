#pragma once

#include "spgnn/image.hpp"
#include "spgnn/rng.hpp"

namespace spgnn {

struct EraseParams {
  double probability = 0.5;
  double area_lo = 0.02;
  double area_hi = 0.33;
  double aspect_lo = 0.3;
  double aspect_hi = 3.33;
  enum class Fill { UniformRandom, Mean } fill = Fill::UniformRandom;

  void validate() const;
};

/// Bilinear resize to (h, w), values clamped to [0,1].
Image resize(const Image& img, int h, int w);

Image flip_horizontal(const Image& img);

/// Mirrors columns with probability 0.5.
Image random_flip(const Image& img, Rng& rng);

/// Overwrites the rectangle rows [r0,r1) x cols [c0,c1) per fill mode.
Image erase_rect(const Image& img, int r0, int r1, int c0, int c1,
                 EraseParams::Fill fill, Rng& rng);

/// With probability p erases one rectangle whose realized area fraction lies
/// in [area_lo, area_hi] and aspect in [aspect_lo, aspect_hi]; identity if no
/// valid rectangle is found within 10 attempts.
Image random_erase(const Image& img, const EraseParams& params, Rng& rng);

struct AugmentConfig {
  bool enabled = true;  // the +DA ablation switch
  EraseParams erase;
};

/// Training-time pipeline after resize: flip then erase. Evaluation uses
/// resize alone.
Image apply_train_augmentation(const Image& img, const AugmentConfig& cfg, Rng& rng);

}  // namespace spgnn
