#include "spgnn/augment.hpp"

#include <algorithm>
#include <cmath>

#include "spgnn/errors.hpp"

namespace spgnn {

void EraseParams::validate() const {
  if (probability < 0.0 || probability > 1.0) {
    raise(ErrorCode::InvalidArgument, "erase probability must be in [0,1]");
  }
  if (!(area_lo > 0.0 && area_lo <= area_hi && area_hi < 1.0)) {
    raise(ErrorCode::InvalidArgument, "erase area range must satisfy 0 < lo <= hi < 1");
  }
  if (!(aspect_lo > 0.0 && aspect_lo <= aspect_hi)) {
    raise(ErrorCode::InvalidArgument, "erase aspect range must satisfy 0 < lo <= hi");
  }
}

Image resize(const Image& img, int h, int w) {
  if (h < 8 || w < 8) {
    raise(ErrorCode::InvalidSize, "resize target must be at least 8x8");
  }
  validate_image(img);
  if (h == img.height && w == img.width) return img;

  Image out(h, w);
  const double sy = static_cast<double>(img.height) / h;
  const double sx = static_cast<double>(img.width) / w;
  for (int y = 0; y < h; ++y) {
    // pixel-center convention; exact identity at equal sizes
    double src_y = (y + 0.5) * sy - 0.5;
    src_y = std::clamp(src_y, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(std::floor(src_y));
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fy = src_y - y0;
    for (int x = 0; x < w; ++x) {
      double src_x = (x + 0.5) * sx - 0.5;
      src_x = std::clamp(src_x, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(std::floor(src_x));
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double fx = src_x - x0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = img.at(y0, x0, ch) * (1.0 - fx) + img.at(y0, x1, ch) * fx;
        const double bot = img.at(y1, x0, ch) * (1.0 - fx) + img.at(y1, x1, ch) * fx;
        out.at(y, x, ch) = std::clamp(top * (1.0 - fy) + bot * fy, 0.0, 1.0);
      }
    }
  }
  return out;
}

Image flip_horizontal(const Image& img) {
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        out.at(y, x, ch) = img.at(y, img.width - 1 - x, ch);
      }
    }
  }
  return out;
}

Image random_flip(const Image& img, Rng& rng) {
  return rng.bernoulli(0.5) ? flip_horizontal(img) : img;
}

Image erase_rect(const Image& img, int r0, int r1, int c0, int c1,
                 EraseParams::Fill fill, Rng& rng) {
  Image out = img;
  double mean = 0.0;
  if (fill == EraseParams::Fill::Mean) {
    for (double v : img.pixels) mean += v;
    mean /= static_cast<double>(img.pixels.size());
  }
  for (int y = r0; y < r1; ++y) {
    for (int x = c0; x < c1; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        out.at(y, x, ch) = fill == EraseParams::Fill::Mean ? mean : rng.uniform();
      }
    }
  }
  return out;
}

Image random_erase(const Image& img, const EraseParams& params, Rng& rng) {
  params.validate();
  validate_image(img);
  if (!rng.bernoulli(params.probability)) return img;

  const double total = static_cast<double>(img.height) * img.width;
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target_area = rng.uniform(params.area_lo, params.area_hi) * total;
    const double aspect = rng.uniform(params.aspect_lo, params.aspect_hi);
    const int eh = std::max(1, static_cast<int>(std::floor(std::sqrt(target_area * aspect))));
    const int ew = std::max(1, static_cast<int>(std::floor(std::sqrt(target_area / aspect))));
    if (eh >= img.height || ew >= img.width) continue;
    // flooring can undershoot the sampled area; keep the realized fraction in range
    const double realized = static_cast<double>(eh) * ew / total;
    if (realized < params.area_lo || realized > params.area_hi) continue;
    const int r0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.height - eh + 1)));
    const int c0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.width - ew + 1)));
    return erase_rect(img, r0, r0 + eh, c0, c0 + ew, params.fill, rng);
  }
  return img;
}

Image apply_train_augmentation(const Image& img, const AugmentConfig& cfg, Rng& rng) {
  if (!cfg.enabled) return img;
  Image out = random_flip(img, rng);
  out = random_erase(out, cfg.erase, rng);
  return out;
}

}  // namespace spgnn
