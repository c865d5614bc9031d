#include "deadeye/render.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deadeye/error.hpp"

namespace deadeye {

Raster::Raster(int width, int height, ColorRgb fill_color)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error("raster: negative dimensions");
  pixels_.resize(static_cast<std::size_t>(width) * height * 3);
  fill(fill_color);
}

void Raster::fill(ColorRgb c) {
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }
}

namespace {

PixelRect circle_bbox(double cx, double cy, double r) {
  // Pixel i is inside when |i + 0.5 - c| <= r.
  return {static_cast<int>(std::ceil(cx - r - 0.5)), static_cast<int>(std::ceil(cy - r - 0.5)),
          static_cast<int>(std::floor(cx + r - 0.5)) + 1,
          static_cast<int>(std::floor(cy + r - 0.5)) + 1};
}

void check_pair(const StereoPair& pair) {
  if (pair.left.width() != pair.right.width() || pair.left.height() != pair.right.height()) {
    throw Error("stereo pair: eye rasters differ in size");
  }
}

}  // namespace

PixelRect disc_bbox(const Disc& disc, const ViewingGeometry& geom) {
  const PointPx c = deg_to_px(disc.center, geom);
  return circle_bbox(c.x, c.y, radius_px(disc.radius_deg, geom));
}

std::size_t fill_circle(Raster& raster, double cx, double cy, double radius, ColorRgb color) {
  const PixelRect box = circle_bbox(cx, cy, radius);
  const double r2 = radius * radius;
  std::size_t written = 0;
  for (int y = std::max(box.y0, 0); y < std::min(box.y1, raster.height()); ++y) {
    const double dy = y + 0.5 - cy;
    for (int x = std::max(box.x0, 0); x < std::min(box.x1, raster.width()); ++x) {
      const double dx = x + 0.5 - cx;
      if (dx * dx + dy * dy <= r2) {
        raster.set(x, y, color);
        ++written;
      }
    }
  }
  return written;
}

Raster render_eye(const Stimulus& stimulus, Eye eye, const ViewingGeometry& geom) {
  validate(geom);
  Raster out(geom.res_w_px, geom.res_h_px, stimulus.background);
  for (const Disc& d : stimulus.discs) {
    const PixelRect box = disc_bbox(d, geom);
    if (box.x0 < 0 || box.y0 < 0 || box.x1 > out.width() || box.y1 > out.height()) {
      throw Error("render: disc " + std::to_string(d.id) + " falls outside the screen");
    }
    if (!d.visible_to(eye)) continue;
    const PointPx c = deg_to_px(d.center, geom);
    fill_circle(out, c.x, c.y, radius_px(d.radius_deg, geom), d.color);
  }
  return out;
}

StereoPair render_pair(const Stimulus& stimulus, const ViewingGeometry& geom) {
  return {render_eye(stimulus, Eye::Left, geom), render_eye(stimulus, Eye::Right, geom)};
}

std::uint8_t luma601(ColorRgb c) noexcept {
  return static_cast<std::uint8_t>((299u * c.r + 587u * c.g + 114u * c.b + 500u) / 1000u);
}

Raster anaglyph(const StereoPair& pair) {
  check_pair(pair);
  Raster out(pair.left.width(), pair.left.height());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const std::uint8_t l = luma601(pair.left.at(x, y));
      const std::uint8_t r = luma601(pair.right.at(x, y));
      out.set(x, y, {l, r, r});
    }
  }
  return out;
}

Raster side_by_side(const StereoPair& pair) {
  check_pair(pair);
  const int w = pair.left.width();
  Raster out(2 * w, pair.left.height());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      out.set(x, y, pair.left.at(x, y));
      out.set(w + x, y, pair.right.at(x, y));
    }
  }
  return out;
}

std::vector<Raster> compose(const StereoPair& pair, CompositeMode mode) {
  switch (mode) {
    case CompositeMode::Anaglyph:
      return {anaglyph(pair)};
    case CompositeMode::SideBySide:
      return {side_by_side(pair)};
    case CompositeMode::PerEyeFiles:
      check_pair(pair);
      return {pair.left, pair.right};
  }
  return {};
}

Raster render_crosshair(const ViewingGeometry& geom, const Palette& palette,
                        const CrosshairStyle& style) {
  Raster out = render_blank(geom, palette);
  const int cx = geom.res_w_px / 2;
  const int cy = geom.res_h_px / 2;
  const int arm = std::max(style.arm_px, 0);
  const int t = std::max(style.thickness_px, 0);
  auto bar = [&](int x0, int y0, int w, int h) {
    for (int y = std::max(y0, 0); y < std::min(y0 + h, out.height()); ++y) {
      for (int x = std::max(x0, 0); x < std::min(x0 + w, out.width()); ++x) {
        out.set(x, y, palette.crosshair);
      }
    }
  };
  bar(cx - arm / 2, cy - t / 2, arm, t);
  bar(cx - t / 2, cy - arm / 2, t, arm);
  return out;
}

Raster render_blank(const ViewingGeometry& geom, const Palette& palette) {
  validate(geom);
  return Raster(geom.res_w_px, geom.res_h_px, palette.background);
}

}  // namespace deadeye
