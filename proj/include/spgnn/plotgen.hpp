#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spgnn/dataset.hpp"
#include "spgnn/image.hpp"

namespace spgnn {

/// Chart element kinds; each maps one-to-one onto a vocabulary API name.
/// The set deliberately contains visually confusable pairs (bar/step/hist,
/// line/stem, scatter/errorbar) so classifiers face a non-trivial task.
enum class ElementKind {
  Bar, Barh, Line, Scatter, Box, Pie, Step, Errorbar, Hist, Stem,
};

inline constexpr int kNumElementKinds = 10;

const char* element_api_name(ElementKind kind);
ElementKind element_from_api(const std::string& api_name);  // throws UnknownApi

/// Rendering dialects. Families differ only in theme (background, axes
/// furniture, palette, stroke weights), never in element geometry.
enum class StyleFamily { A, B };

StyleFamily style_family_from_string(const std::string& s);
const char* style_family_name(StyleFamily f);

struct Rgb {
  double r, g, b;
};

struct StyleTheme {
  Rgb background;
  Rgb panel;                   // axes interior
  Rgb frame;                   // spine/tick color
  bool full_frame;             // all four spines vs left+bottom only
  bool ticks;
  bool gridlines;
  Rgb grid_color;
  double stroke_scale;         // multiplies geometric stroke thickness
  double tick_length;          // pixels
  std::array<Rgb, 6> palette;  // same size across families (color picks are geometry)
};

StyleTheme theme_for(StyleFamily family);

/// Geometry records in data coordinates ([0,1]^2, y up). Theme-independent:
/// identical across style families for the same (labels, rng_state).
struct Primitive {
  enum class Type { Rect, Segment, Disc, Wedge } type;
  // Rect: (x0,y0)-(x1,y1); Segment: endpoints + thickness;
  // Disc: center (x0,y0), radius a; Wedge: center + radius a, angles b..c.
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double a = 0, b = 0, c = 0;
  double thickness = 0;
  int color_index = 0;

  bool operator==(const Primitive&) const = default;
};

struct ElementTrace {
  ElementKind kind;
  std::vector<Primitive> primitives;

  bool operator==(const ElementTrace&) const = default;
};

struct RenderTrace {
  std::vector<ElementTrace> elements;

  bool operator==(const RenderTrace&) const = default;
};

struct TracedRender {
  Image image;
  RenderTrace trace;
  // Per drawn element, the pixels it rasterized (before later elements may
  // paint over them), restricted to the axes region.
  std::vector<std::vector<std::uint8_t>> element_masks;
  int axes_pixel_area = 0;
};

/// Renders every labeled element kind onto one shared axes region.
Image render_sample(const LabelVector& labels, const ApiVocabulary& vocab,
                    StyleFamily family, std::uint64_t rng_state, int height = 64,
                    int width = 64);

TracedRender render_sample_traced(const LabelVector& labels, const ApiVocabulary& vocab,
                                  StyleFamily family, std::uint64_t rng_state,
                                  int height = 64, int width = 64);

struct CorpusSpec {
  std::vector<std::string> apis;            // vocabulary order
  std::map<std::string, int> samples_per_api;  // exact per-API label-bit totals
  int max_labels_per_image = 2;
  int image_height = 64;
  int image_width = 64;
  StyleFamily family = StyleFamily::A;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidSpec
  static CorpusSpec load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Writes one PPM per sample plus manifest.jsonl / vocab.txt / corpus_spec.json
/// under out_dir. Per-API label totals match the spec exactly and the whole
/// corpus is a pure function of the spec.
DatasetManifest generate_corpus(const CorpusSpec& spec,
                                const std::filesystem::path& out_dir);

}  // namespace spgnn
