#include "spgnn/plotgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "spgnn/errors.hpp"
#include "spgnn/rng.hpp"

namespace spgnn {

using nlohmann::json;

const char* element_api_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::Bar: return "bar";
    case ElementKind::Barh: return "barh";
    case ElementKind::Line: return "line";
    case ElementKind::Scatter: return "scatter";
    case ElementKind::Box: return "boxplot";
    case ElementKind::Pie: return "pie";
    case ElementKind::Step: return "step";
    case ElementKind::Errorbar: return "errorbar";
    case ElementKind::Hist: return "hist";
    case ElementKind::Stem: return "stem";
  }
  return "?";
}

ElementKind element_from_api(const std::string& api_name) {
  for (int k = 0; k < kNumElementKinds; ++k) {
    auto kind = static_cast<ElementKind>(k);
    if (api_name == element_api_name(kind)) return kind;
  }
  raise(ErrorCode::UnknownApi, "no chart element for API '" + api_name + "'");
}

StyleFamily style_family_from_string(const std::string& s) {
  if (s == "A" || s == "a") return StyleFamily::A;
  if (s == "B" || s == "b") return StyleFamily::B;
  raise(ErrorCode::InvalidSpec, "style family must be A or B, got '" + s + "'");
}

const char* style_family_name(StyleFamily f) {
  return f == StyleFamily::A ? "A" : "B";
}

StyleTheme theme_for(StyleFamily family) {
  if (family == StyleFamily::A) {
    // white panel, boxed axes with ticks
    return StyleTheme{
        .background = {1.0, 1.0, 1.0},
        .panel = {1.0, 1.0, 1.0},
        .frame = {0.15, 0.15, 0.15},
        .full_frame = true,
        .ticks = true,
        .gridlines = false,
        .grid_color = {0.85, 0.85, 0.85},
        .stroke_scale = 1.0,
        .tick_length = 2.0,
        .palette = {Rgb{0.12, 0.47, 0.71}, Rgb{1.00, 0.50, 0.05},
                    Rgb{0.17, 0.63, 0.17}, Rgb{0.84, 0.15, 0.16},
                    Rgb{0.58, 0.40, 0.74}, Rgb{0.55, 0.34, 0.29}},
    };
  }
  // gray panel with white gridlines, open spines, heavier strokes
  return StyleTheme{
      .background = {0.97, 0.97, 0.97},
      .panel = {0.92, 0.92, 0.92},
      .frame = {0.30, 0.30, 0.30},
      .full_frame = false,
      .ticks = false,
      .gridlines = true,
      .grid_color = {1.0, 1.0, 1.0},
      .stroke_scale = 1.35,
      .tick_length = 0.0,
      .palette = {Rgb{0.97, 0.46, 0.43}, Rgb{0.49, 0.68, 0.00},
                  Rgb{0.00, 0.75, 0.77}, Rgb{0.78, 0.49, 1.00},
                  Rgb{0.90, 0.67, 0.01}, Rgb{0.00, 0.62, 0.45}},
  };
}

namespace {

// ---------------------------------------------------------------------------
// Geometry generation (theme-independent, pure function of labels + rng)
// ---------------------------------------------------------------------------

int rng_count(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(hi - lo + 1)));
}

Primitive rect(double x0, double y0, double x1, double y1, int color) {
  Primitive p;
  p.type = Primitive::Type::Rect;
  p.x0 = x0; p.y0 = y0; p.x1 = x1; p.y1 = y1;
  p.color_index = color;
  return p;
}

Primitive segment(double x0, double y0, double x1, double y1, double thickness, int color) {
  Primitive p;
  p.type = Primitive::Type::Segment;
  p.x0 = x0; p.y0 = y0; p.x1 = x1; p.y1 = y1;
  p.thickness = thickness;
  p.color_index = color;
  return p;
}

Primitive disc(double cx, double cy, double radius, int color) {
  Primitive p;
  p.type = Primitive::Type::Disc;
  p.x0 = cx; p.y0 = cy; p.a = radius;
  p.color_index = color;
  return p;
}

Primitive wedge(double cx, double cy, double radius, double a0, double a1, int color) {
  Primitive p;
  p.type = Primitive::Type::Wedge;
  p.x0 = cx; p.y0 = cy; p.a = radius; p.b = a0; p.c = a1;
  p.color_index = color;
  return p;
}

ElementTrace gen_bar(Rng& rng) {
  ElementTrace el{ElementKind::Bar, {}};
  const int k = rng_count(rng, 3, 8);
  const double wfrac = rng.uniform(0.5, 0.8);
  const int color = static_cast<int>(rng.uniform_int(6));
  const double slot = 0.96 / k;
  for (int i = 0; i < k; ++i) {
    const double h = rng.uniform(0.12, 0.9);
    const double x0 = 0.02 + slot * (i + (1.0 - wfrac) / 2.0);
    el.primitives.push_back(rect(x0, 0.02, x0 + slot * wfrac, 0.02 + h, color));
  }
  return el;
}

ElementTrace gen_barh(Rng& rng) {
  ElementTrace el{ElementKind::Barh, {}};
  const int k = rng_count(rng, 3, 8);
  const double wfrac = rng.uniform(0.5, 0.8);
  const int color = static_cast<int>(rng.uniform_int(6));
  const double slot = 0.96 / k;
  for (int i = 0; i < k; ++i) {
    const double w = rng.uniform(0.12, 0.9);
    const double y0 = 0.02 + slot * (i + (1.0 - wfrac) / 2.0);
    el.primitives.push_back(rect(0.02, y0, 0.02 + w, y0 + slot * wfrac, color));
  }
  return el;
}

ElementTrace gen_line(Rng& rng) {
  ElementTrace el{ElementKind::Line, {}};
  const int k = rng_count(rng, 5, 12);
  const int color = static_cast<int>(rng.uniform_int(6));
  const double thickness = rng.uniform(0.012, 0.024);
  double y = rng.uniform(0.2, 0.8);
  double prev_x = 0.04, prev_y = y;
  for (int i = 1; i < k; ++i) {
    const double x = 0.04 + 0.92 * i / (k - 1);
    y = std::clamp(y + rng.uniform(-0.25, 0.25), 0.08, 0.92);
    el.primitives.push_back(segment(prev_x, prev_y, x, y, thickness, color));
    prev_x = x;
    prev_y = y;
  }
  return el;
}

ElementTrace gen_scatter(Rng& rng) {
  ElementTrace el{ElementKind::Scatter, {}};
  const int k = rng_count(rng, 8, 26);
  const int color = static_cast<int>(rng.uniform_int(6));
  const double radius = rng.uniform(0.014, 0.03);
  for (int i = 0; i < k; ++i) {
    el.primitives.push_back(
        disc(rng.uniform(0.06, 0.94), rng.uniform(0.08, 0.92), radius, color));
  }
  return el;
}

ElementTrace gen_box(Rng& rng) {
  ElementTrace el{ElementKind::Box, {}};
  const int nb = rng_count(rng, 1, 3);
  const int color = static_cast<int>(rng.uniform_int(6));
  const int median_color = (color + 3) % 6;
  const double slot = 0.96 / nb;
  for (int i = 0; i < nb; ++i) {
    const double cx = 0.02 + slot * (i + 0.5);
    const double half_w = slot * rng.uniform(0.18, 0.3);
    const double q1 = rng.uniform(0.22, 0.45);
    const double q3 = q1 + rng.uniform(0.12, 0.32);
    const double med = rng.uniform(q1 + 0.02, q3 - 0.02);
    const double lo = std::max(0.05, q1 - rng.uniform(0.06, 0.2));
    const double hi = std::min(0.95, q3 + rng.uniform(0.06, 0.2));
    el.primitives.push_back(rect(cx - half_w, q1, cx + half_w, q3, color));
    el.primitives.push_back(segment(cx - half_w, med, cx + half_w, med, 0.012, median_color));
    el.primitives.push_back(segment(cx, lo, cx, q1, 0.008, color));
    el.primitives.push_back(segment(cx, q3, cx, hi, 0.008, color));
    el.primitives.push_back(segment(cx - half_w * 0.6, lo, cx + half_w * 0.6, lo, 0.008, color));
    el.primitives.push_back(segment(cx - half_w * 0.6, hi, cx + half_w * 0.6, hi, 0.008, color));
  }
  return el;
}

ElementTrace gen_pie(Rng& rng) {
  ElementTrace el{ElementKind::Pie, {}};
  const double cx = rng.uniform(0.28, 0.72);
  const double cy = rng.uniform(0.3, 0.72);
  const double radius = rng.uniform(0.14, 0.24);
  const int nw = rng_count(rng, 3, 6);
  const int color0 = static_cast<int>(rng.uniform_int(6));
  std::vector<double> weights(nw);
  double total = 0.0;
  for (double& w : weights) {
    w = rng.uniform(0.5, 1.5);
    total += w;
  }
  double angle = rng.uniform(0.0, 2.0 * M_PI);
  for (int i = 0; i < nw; ++i) {
    const double span = 2.0 * M_PI * weights[i] / total;
    el.primitives.push_back(wedge(cx, cy, radius, angle, angle + span, (color0 + i) % 6));
    angle += span;
  }
  return el;
}

ElementTrace gen_step(Rng& rng) {
  ElementTrace el{ElementKind::Step, {}};
  const int k = rng_count(rng, 5, 10);
  const int color = static_cast<int>(rng.uniform_int(6));
  const double thickness = rng.uniform(0.012, 0.024);
  double prev_y = rng.uniform(0.15, 0.85);
  for (int i = 0; i < k; ++i) {
    const double x0 = 0.04 + 0.92 * i / k;
    const double x1 = 0.04 + 0.92 * (i + 1) / k;
    const double y = rng.uniform(0.12, 0.9);
    if (i > 0) el.primitives.push_back(segment(x0, prev_y, x0, y, thickness, color));
    el.primitives.push_back(segment(x0, y, x1, y, thickness, color));
    prev_y = y;
  }
  return el;
}

ElementTrace gen_errorbar(Rng& rng) {
  ElementTrace el{ElementKind::Errorbar, {}};
  const int k = rng_count(rng, 4, 8);
  const int color = static_cast<int>(rng.uniform_int(6));
  const double cap = rng.uniform(0.018, 0.035);
  for (int i = 0; i < k; ++i) {
    const double x = 0.08 + 0.84 * i / (k - 1);
    const double y = rng.uniform(0.22, 0.78);
    const double err = rng.uniform(0.05, 0.16);
    el.primitives.push_back(segment(x, y - err, x, y + err, 0.008, color));
    el.primitives.push_back(segment(x - cap, y - err, x + cap, y - err, 0.008, color));
    el.primitives.push_back(segment(x - cap, y + err, x + cap, y + err, 0.008, color));
    el.primitives.push_back(disc(x, y, 0.016, color));
  }
  return el;
}

ElementTrace gen_hist(Rng& rng) {
  ElementTrace el{ElementKind::Hist, {}};
  const int k = rng_count(rng, 9, 16);
  const int color = static_cast<int>(rng.uniform_int(6));
  const double slot = 0.96 / k;
  double h = rng.uniform(0.2, 0.7);
  for (int i = 0; i < k; ++i) {
    h = std::clamp(h + rng.uniform(-0.22, 0.22), 0.08, 0.92);
    const double x0 = 0.02 + slot * i;
    el.primitives.push_back(rect(x0, 0.02, x0 + slot, 0.02 + h, color));
  }
  return el;
}

ElementTrace gen_stem(Rng& rng) {
  ElementTrace el{ElementKind::Stem, {}};
  const int k = rng_count(rng, 6, 14);
  const int color = static_cast<int>(rng.uniform_int(6));
  const double radius = rng.uniform(0.012, 0.022);
  for (int i = 0; i < k; ++i) {
    const double x = 0.06 + 0.88 * i / (k - 1);
    const double y = rng.uniform(0.18, 0.88);
    el.primitives.push_back(segment(x, 0.04, x, y, 0.006, color));
    el.primitives.push_back(disc(x, y, radius, color));
  }
  return el;
}

ElementTrace generate_element(ElementKind kind, Rng& rng) {
  switch (kind) {
    case ElementKind::Bar: return gen_bar(rng);
    case ElementKind::Barh: return gen_barh(rng);
    case ElementKind::Line: return gen_line(rng);
    case ElementKind::Scatter: return gen_scatter(rng);
    case ElementKind::Box: return gen_box(rng);
    case ElementKind::Pie: return gen_pie(rng);
    case ElementKind::Step: return gen_step(rng);
    case ElementKind::Errorbar: return gen_errorbar(rng);
    case ElementKind::Hist: return gen_hist(rng);
    case ElementKind::Stem: return gen_stem(rng);
  }
  raise(ErrorCode::InvalidArgument, "unknown element kind");
}

// ---------------------------------------------------------------------------
// Rasterization
// ---------------------------------------------------------------------------

struct AxesRect {
  int x0, y0, x1, y1;  // pixel bounds, [x0,x1) x [y0,y1)
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
};

AxesRect axes_rect(int img_h, int img_w) {
  AxesRect r;
  r.x0 = static_cast<int>(std::lround(0.14 * img_w));
  r.x1 = static_cast<int>(std::lround(0.95 * img_w));
  r.y0 = static_cast<int>(std::lround(0.07 * img_h));
  r.y1 = static_cast<int>(std::lround(0.88 * img_h));
  return r;
}

class Painter {
 public:
  Painter(Image& img, const AxesRect& axes, const StyleTheme& theme)
      : img_(img), axes_(axes), theme_(theme) {}

  void set_mask(std::vector<std::uint8_t>* mask) { mask_ = mask; }

  // data [0,1]^2 -> pixel coordinates (continuous)
  double px(double x) const { return axes_.x0 + x * axes_.width(); }
  double py(double y) const { return axes_.y0 + (1.0 - y) * axes_.height(); }

  void fill_pixel(int x, int y, const Rgb& color) {
    if (x < axes_.x0 || x >= axes_.x1 || y < axes_.y0 || y >= axes_.y1) return;
    img_.at(y, x, 0) = color.r;
    img_.at(y, x, 1) = color.g;
    img_.at(y, x, 2) = color.b;
    if (mask_) (*mask_)[static_cast<std::size_t>(y) * img_.width + x] = 1;
  }

  void draw(const Primitive& prim) {
    const Rgb color = theme_.palette[static_cast<std::size_t>(prim.color_index)];
    const double unit = std::min(axes_.width(), axes_.height());
    switch (prim.type) {
      case Primitive::Type::Rect: {
        const double rx0 = px(std::min(prim.x0, prim.x1));
        const double rx1 = px(std::max(prim.x0, prim.x1));
        const double ry0 = py(std::max(prim.y0, prim.y1));
        const double ry1 = py(std::min(prim.y0, prim.y1));
        for (int y = static_cast<int>(std::floor(ry0)); y <= static_cast<int>(std::ceil(ry1)); ++y) {
          for (int x = static_cast<int>(std::floor(rx0)); x <= static_cast<int>(std::ceil(rx1)); ++x) {
            if (x + 0.5 >= rx0 && x + 0.5 < rx1 && y + 0.5 >= ry0 && y + 0.5 < ry1) {
              fill_pixel(x, y, color);
            }
          }
        }
        break;
      }
      case Primitive::Type::Segment: {
        const double ax = px(prim.x0), ay = py(prim.y0);
        const double bx = px(prim.x1), by = py(prim.y1);
        const double half = std::max(0.5, 0.5 * prim.thickness * unit * theme_.stroke_scale);
        const int x_lo = static_cast<int>(std::floor(std::min(ax, bx) - half)) - 1;
        const int x_hi = static_cast<int>(std::ceil(std::max(ax, bx) + half)) + 1;
        const int y_lo = static_cast<int>(std::floor(std::min(ay, by) - half)) - 1;
        const int y_hi = static_cast<int>(std::ceil(std::max(ay, by) + half)) + 1;
        const double dx = bx - ax, dy = by - ay;
        const double len2 = dx * dx + dy * dy;
        for (int y = y_lo; y <= y_hi; ++y) {
          for (int x = x_lo; x <= x_hi; ++x) {
            const double cx = x + 0.5, cy = y + 0.5;
            double t = len2 > 0.0 ? ((cx - ax) * dx + (cy - ay) * dy) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double ex = ax + t * dx - cx, ey = ay + t * dy - cy;
            if (ex * ex + ey * ey <= half * half) fill_pixel(x, y, color);
          }
        }
        break;
      }
      case Primitive::Type::Disc: {
        const double cx = px(prim.x0), cy = py(prim.y0);
        const double radius = std::max(1.0, prim.a * unit * theme_.stroke_scale);
        for (int y = static_cast<int>(std::floor(cy - radius)); y <= static_cast<int>(std::ceil(cy + radius)); ++y) {
          for (int x = static_cast<int>(std::floor(cx - radius)); x <= static_cast<int>(std::ceil(cx + radius)); ++x) {
            const double ex = x + 0.5 - cx, ey = y + 0.5 - cy;
            if (ex * ex + ey * ey <= radius * radius) fill_pixel(x, y, color);
          }
        }
        break;
      }
      case Primitive::Type::Wedge: {
        const double cx = px(prim.x0), cy = py(prim.y0);
        const double radius = prim.a * unit;
        for (int y = static_cast<int>(std::floor(cy - radius)); y <= static_cast<int>(std::ceil(cy + radius)); ++y) {
          for (int x = static_cast<int>(std::floor(cx - radius)); x <= static_cast<int>(std::ceil(cx + radius)); ++x) {
            const double ex = x + 0.5 - cx, ey = cy - (y + 0.5);  // y up in data space
            if (ex * ex + ey * ey > radius * radius) continue;
            double ang = std::atan2(ey, ex);
            if (ang < 0) ang += 2.0 * M_PI;
            double a0 = std::fmod(prim.b, 2.0 * M_PI);
            if (a0 < 0) a0 += 2.0 * M_PI;
            const double span = prim.c - prim.b;
            double rel = ang - a0;
            if (rel < 0) rel += 2.0 * M_PI;
            if (rel <= span) fill_pixel(x, y, color);
          }
        }
        break;
      }
    }
  }

 private:
  Image& img_;
  AxesRect axes_;
  StyleTheme theme_;
  std::vector<std::uint8_t>* mask_ = nullptr;
};

void paint_furniture(Image& img, const AxesRect& axes, const StyleTheme& theme) {
  auto hline = [&](int y, int x0, int x1, const Rgb& c) {
    if (y < 0 || y >= img.height) return;
    for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x) {
      img.at(y, x, 0) = c.r; img.at(y, x, 1) = c.g; img.at(y, x, 2) = c.b;
    }
  };
  auto vline = [&](int x, int y0, int y1, const Rgb& c) {
    if (x < 0 || x >= img.width) return;
    for (int y = std::max(0, y0); y <= std::min(img.height - 1, y1); ++y) {
      img.at(y, x, 0) = c.r; img.at(y, x, 1) = c.g; img.at(y, x, 2) = c.b;
    }
  };

  if (theme.gridlines) {
    for (int g = 1; g <= 3; ++g) {
      hline(axes.y0 + g * axes.height() / 4, axes.x0, axes.x1 - 1, theme.grid_color);
      vline(axes.x0 + g * axes.width() / 4, axes.y0, axes.y1 - 1, theme.grid_color);
    }
  }
  // spines
  vline(axes.x0, axes.y0, axes.y1 - 1, theme.frame);
  hline(axes.y1 - 1, axes.x0, axes.x1 - 1, theme.frame);
  if (theme.full_frame) {
    vline(axes.x1 - 1, axes.y0, axes.y1 - 1, theme.frame);
    hline(axes.y0, axes.x0, axes.x1 - 1, theme.frame);
  }
  if (theme.ticks) {
    const int tick = static_cast<int>(theme.tick_length);
    for (int g = 0; g <= 4; ++g) {
      const int x = axes.x0 + g * (axes.width() - 1) / 4;
      vline(x, axes.y1, axes.y1 + tick, theme.frame);
      const int y = axes.y0 + g * (axes.height() - 1) / 4;
      hline(y, axes.x0 - tick, axes.x0, theme.frame);
    }
  }
}

std::uint64_t derive_render_state(std::uint64_t seed, std::uint64_t sample_index) {
  std::uint64_t sm = seed ^ fnv1a64("plotgen-render");
  std::uint64_t h = splitmix64(sm);
  sm = h ^ (sample_index * 0x9e3779b97f4a7c15ULL);
  return splitmix64(sm);
}

}  // namespace

TracedRender render_sample_traced(const LabelVector& labels, const ApiVocabulary& vocab,
                                  StyleFamily family, std::uint64_t rng_state,
                                  int height, int width) {
  if (labels.size() != vocab.size()) {
    raise(ErrorCode::ShapeMismatch, "label vector length does not match vocabulary");
  }
  if (!labels.any()) {
    raise(ErrorCode::InvalidArgument, "render_sample requires at least one label bit");
  }
  if (height < 16 || width < 16) {
    raise(ErrorCode::InvalidSize, "render size must be at least 16x16");
  }

  // Geometry pass: theme-independent, as the cross-family invariant requires.
  Rng rng(rng_state);
  RenderTrace trace;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (!labels.bits[j]) continue;
    trace.elements.push_back(generate_element(element_from_api(vocab.name(j)), rng));
  }

  // Paint pass.
  const StyleTheme theme = theme_for(family);
  const AxesRect axes = axes_rect(height, width);
  TracedRender out;
  out.image = Image(height, width);
  out.axes_pixel_area = axes.width() * axes.height();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const bool inside = x >= axes.x0 && x < axes.x1 && y >= axes.y0 && y < axes.y1;
      const Rgb& c = inside ? theme.panel : theme.background;
      out.image.at(y, x, 0) = c.r;
      out.image.at(y, x, 1) = c.g;
      out.image.at(y, x, 2) = c.b;
    }
  }
  Painter painter(out.image, axes, theme);
  if (theme.gridlines) paint_furniture(out.image, axes, theme);  // grid under the data
  for (const auto& element : trace.elements) {
    out.element_masks.emplace_back(static_cast<std::size_t>(height) * width, 0);
    painter.set_mask(&out.element_masks.back());
    for (const auto& prim : element.primitives) painter.draw(prim);
  }
  painter.set_mask(nullptr);
  {
    StyleTheme frame_only = theme;
    frame_only.gridlines = false;
    paint_furniture(out.image, axes, frame_only);
  }
  out.trace = std::move(trace);
  return out;
}

Image render_sample(const LabelVector& labels, const ApiVocabulary& vocab,
                    StyleFamily family, std::uint64_t rng_state, int height, int width) {
  return render_sample_traced(labels, vocab, family, rng_state, height, width).image;
}

void CorpusSpec::validate() const {
  if (apis.size() < 2) {
    raise(ErrorCode::InvalidSpec, "corpus needs at least 2 APIs");
  }
  for (const auto& api : apis) {
    element_from_api(api);  // throws UnknownApi for unsupported names
    auto it = samples_per_api.find(api);
    if (it == samples_per_api.end() || it->second < 1) {
      raise(ErrorCode::InvalidSpec, "samples_per_api['" + api + "'] must be >= 1");
    }
  }
  for (const auto& [api, count] : samples_per_api) {
    (void)count;
    if (std::find(apis.begin(), apis.end(), api) == apis.end()) {
      raise(ErrorCode::InvalidSpec, "samples_per_api names API '" + api +
                                        "' that is not in the vocabulary list");
    }
  }
  if (max_labels_per_image < 1 ||
      max_labels_per_image > static_cast<int>(apis.size())) {
    raise(ErrorCode::InvalidSpec, "max_labels_per_image must be in [1, vocabulary size]");
  }
  if (image_height < 16 || image_width < 16) {
    raise(ErrorCode::InvalidSpec, "corpus image size must be at least 16x16");
  }
}

CorpusSpec CorpusSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::MissingFile, "corpus spec not found: " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    raise(ErrorCode::InvalidSpec, path.string() + ": " + e.what());
  }
  CorpusSpec spec;
  try {
    if (j.contains("apis")) spec.apis = j["apis"].get<std::vector<std::string>>();
    for (auto& [k, v] : j.at("samples_per_api").items()) {
      spec.samples_per_api[k] = v.get<int>();
    }
    if (spec.apis.empty()) {
      for (const auto& [k, v] : spec.samples_per_api) {
        (void)v;
        spec.apis.push_back(k);
      }
    }
    spec.max_labels_per_image = j.value("max_labels_per_image", 2);
    spec.image_height = j.value("image_height", 64);
    spec.image_width = j.value("image_width", 64);
    spec.family = style_family_from_string(j.value("family", "A"));
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    raise(ErrorCode::InvalidSpec, path.string() + ": " + e.what());
  }
  spec.validate();
  return spec;
}

void CorpusSpec::save(const std::filesystem::path& path) const {
  json j;
  j["apis"] = apis;
  j["samples_per_api"] = json::object();
  for (const auto& [k, v] : samples_per_api) j["samples_per_api"][k] = v;
  j["max_labels_per_image"] = max_labels_per_image;
  j["image_height"] = image_height;
  j["image_width"] = image_width;
  j["family"] = style_family_name(family);
  j["seed"] = seed;
  std::ofstream out(path);
  if (!out) {
    raise(ErrorCode::UnwritableOutput, "cannot write corpus spec: " + path.string());
  }
  out << j.dump(2) << "\n";
}

DatasetManifest generate_corpus(const CorpusSpec& spec,
                                const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) {
    raise(ErrorCode::UnwritableOutput,
          "cannot create output directory: " + (out_dir / "images").string());
  }

  ApiVocabulary vocab(spec.apis);
  const std::size_t c = vocab.size();
  std::vector<long> remaining(c, 0);
  long total = 0;
  for (std::size_t j = 0; j < c; ++j) {
    remaining[j] = spec.samples_per_api.at(vocab.name(j));
    total += remaining[j];
  }

  // Assemble label sets that exhaust per-API counts exactly: sample a label
  // count, then draw that many distinct APIs weighted by remaining budget.
  Rng label_rng = Rng::substream(spec.seed, {fnv1a64("corpus-labels")});
  std::vector<LabelVector> label_sets;
  while (total > 0) {
    std::vector<std::size_t> avail;
    for (std::size_t j = 0; j < c; ++j) {
      if (remaining[j] > 0) avail.push_back(j);
    }
    const int l_max = std::min<int>(spec.max_labels_per_image, static_cast<int>(avail.size()));
    const int num_labels = 1 + static_cast<int>(label_rng.uniform_int(static_cast<std::uint64_t>(l_max)));
    LabelVector labels(c);
    for (int pick = 0; pick < num_labels; ++pick) {
      long weight_total = 0;
      for (std::size_t j : avail) {
        if (!labels.bits[j]) weight_total += remaining[j];
      }
      long r = static_cast<long>(label_rng.uniform_int(static_cast<std::uint64_t>(weight_total)));
      for (std::size_t j : avail) {
        if (labels.bits[j]) continue;
        r -= remaining[j];
        if (r < 0) {
          labels.bits[j] = 1;
          --remaining[j];
          --total;
          break;
        }
      }
    }
    label_sets.push_back(std::move(labels));
  }

  DatasetManifest manifest{vocab, {}, {}};
  manifest.metadata["family"] = style_family_name(spec.family);
  manifest.metadata["seed"] = std::to_string(spec.seed);
  manifest.metadata["generator"] = "plotgen-v1";

  for (std::size_t i = 0; i < label_sets.size(); ++i) {
    char id[24];
    std::snprintf(id, sizeof(id), "s%06zu", i);
    const Image img = render_sample(label_sets[i], vocab, spec.family,
                                    derive_render_state(spec.seed, i),
                                    spec.image_height, spec.image_width);
    const auto image_path = out_dir / "images" / (std::string(id) + ".ppm");
    save_ppm(img, image_path);
    manifest.samples.push_back(PlotSample{id, image_path.string(), label_sets[i]});
  }

  {
    std::ofstream vf(out_dir / "vocab.txt");
    if (!vf) raise(ErrorCode::UnwritableOutput, "cannot write vocab.txt");
    for (const auto& name : vocab.names()) vf << name << "\n";
  }
  manifest.save(out_dir / "manifest.jsonl");
  spec.save(out_dir / "corpus_spec.json");
  return manifest;
}

}  // namespace spgnn
