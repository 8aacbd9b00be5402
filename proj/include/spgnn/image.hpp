#pragma once

#include <filesystem>
#include <vector>

namespace spgnn {

/// RGB raster, interleaved channels, values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;  // size height*width*3

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, fill) {}

  double& at(int y, int x, int ch) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
  }
  double at(int y, int x, int ch) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
  }

  bool same_pixels(const Image& other) const {
    return height == other.height && width == other.width && pixels == other.pixels;
  }
};

/// Throws InvalidSize unless dimensions are sane (>= 8 per side) and the
/// buffer length matches.
void validate_image(const Image& img);

/// Binary PPM (P6, maxval 255). Lossless for 8-bit content and
/// byte-deterministic, which is what corpus reproducibility tests rely on.
void save_ppm(const Image& img, const std::filesystem::path& path);
Image load_ppm(const std::filesystem::path& path);

/// Parses PPM bytes already in memory (the inference service request body).
Image decode_ppm(const std::string& bytes);

}  // namespace spgnn
