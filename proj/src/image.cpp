#include "spgnn/image.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "spgnn/errors.hpp"

namespace spgnn {

void validate_image(const Image& img) {
  if (img.height < 8 || img.width < 8) {
    raise(ErrorCode::InvalidSize,
          "image must be at least 8x8, got " + std::to_string(img.height) + "x" +
              std::to_string(img.width));
  }
  if (img.pixels.size() != static_cast<std::size_t>(img.height) * img.width * 3) {
    raise(ErrorCode::ShapeMismatch, "pixel buffer does not match image dimensions");
  }
}

namespace {

std::uint8_t quantize(double v) {
  double scaled = std::lround(std::fmin(std::fmax(v, 0.0), 1.0) * 255.0);
  return static_cast<std::uint8_t>(scaled);
}

// Reads one whitespace-delimited token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  while (in) {
    int c = in.peek();
    if (c == EOF) break;
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    in >> tok;
    return tok;
  }
  return tok;
}

Image parse_ppm_stream(std::istream& in, const std::string& origin) {
  const std::string magic = next_token(in);
  if (magic != "P6") {
    raise(ErrorCode::UnreadableImage, origin + ": not a binary PPM (P6) file");
  }
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    raise(ErrorCode::UnreadableImage, origin + ": malformed PPM header");
  }
  if (width <= 0 || height <= 0 || maxval != 255) {
    raise(ErrorCode::UnreadableImage, origin + ": unsupported PPM header");
  }
  in.get();  // single whitespace after maxval
  std::vector<char> raw(static_cast<std::size_t>(width) * height * 3);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    raise(ErrorCode::UnreadableImage, origin + ": truncated pixel data");
  }
  Image img(height, width);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    img.pixels[i] = static_cast<std::uint8_t>(raw[i]) / 255.0;
  }
  return img;
}

}  // namespace

void save_ppm(const Image& img, const std::filesystem::path& path) {
  validate_image(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(ErrorCode::UnwritableOutput, "cannot open " + path.string() + " for writing");
  }
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<char> raw(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    raw[i] = static_cast<char>(quantize(img.pixels[i]));
  }
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!out) {
    raise(ErrorCode::UnwritableOutput, "short write to " + path.string());
  }
}

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorCode::MissingFile, "image file not found: " + path.string());
  }
  return parse_ppm_stream(in, path.string());
}

Image decode_ppm(const std::string& bytes) {
  std::istringstream in(bytes);
  return parse_ppm_stream(in, "<payload>");
}

}  // namespace spgnn
