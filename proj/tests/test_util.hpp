#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "spgnn/dataset.hpp"
#include "spgnn/image.hpp"

namespace testutil {

/// Fresh directory under the system temp root, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("spgnn_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

/// 16x16 solid-color placeholder image on disk.
inline std::filesystem::path write_dummy_image(const std::filesystem::path& dir,
                                               const std::string& name, double value = 0.5) {
  spgnn::Image img(16, 16, value);
  const auto path = dir / name;
  spgnn::save_ppm(img, path);
  return path;
}

/// In-memory manifest over dummy label sets; image paths point at one shared
/// placeholder so loads still resolve.
inline spgnn::DatasetManifest make_manifest(const spgnn::ApiVocabulary& vocab,
                                            const std::vector<std::vector<std::string>>& rows,
                                            const std::filesystem::path& image_path) {
  spgnn::DatasetManifest manifest{vocab, {}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    spgnn::PlotSample s;
    s.id = "s" + std::to_string(i);
    s.image_path = image_path.string();
    s.labels = spgnn::encode_labels(rows[i], vocab);
    manifest.samples.push_back(std::move(s));
  }
  return manifest;
}

}  // namespace testutil
