#pragma once

#include <vector>

#include "deadeye/geometry.hpp"
#include "deadeye/raster.hpp"
#include "deadeye/scene.hpp"

namespace deadeye {

// Pixels whose centres fall inside the disc. Rendering is aliased, so this
// rectangle bounds every pixel a disc can touch.
PixelRect disc_bbox(const Disc& disc, const ViewingGeometry& geom);

// Fills pixels whose centre lies within `radius` of (cx, cy). Returns the
// number of pixels written.
std::size_t fill_circle(Raster& raster, double cx, double cy, double radius, ColorRgb color);

Raster render_eye(const Stimulus& stimulus, Eye eye, const ViewingGeometry& geom);
StereoPair render_pair(const Stimulus& stimulus, const ViewingGeometry& geom);

enum class CompositeMode { Anaglyph, SideBySide, PerEyeFiles };

// ITU-R BT.601 luma, rounded to nearest.
std::uint8_t luma601(ColorRgb c) noexcept;

Raster anaglyph(const StereoPair& pair);
Raster side_by_side(const StereoPair& pair);
// Anaglyph and SideBySide yield one raster, PerEyeFiles yields {left, right}.
std::vector<Raster> compose(const StereoPair& pair, CompositeMode mode);

struct CrosshairStyle {
  int arm_px = 60;  // full length of each bar
  int thickness_px = 6;
};

Raster render_crosshair(const ViewingGeometry& geom, const Palette& palette = {},
                        const CrosshairStyle& style = {});
Raster render_blank(const ViewingGeometry& geom, const Palette& palette = {});

}  // namespace deadeye
