#include "deadeye/geometry.hpp"

#include <cmath>
#include <numbers>

#include "deadeye/error.hpp"

namespace deadeye {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

void require_distance(double distance_cm) {
  if (!(distance_cm > 0.0)) throw Error("viewing distance must be positive");
}

}  // namespace

void validate(const ViewingGeometry& g) {
  if (!(g.screen_w_cm > 0.0) || !(g.screen_h_cm > 0.0) || g.res_w_px <= 0 || g.res_h_px <= 0 ||
      !(g.distance_cm > 0.0)) {
    throw Error("viewing geometry: all dimensions must be positive");
  }
}

double cm_to_deg(double size_cm, double distance_cm) {
  require_distance(distance_cm);
  if (size_cm < 0.0) throw Error("cm_to_deg: negative size");
  return 2.0 * std::atan(size_cm / (2.0 * distance_cm)) * kDegPerRad;
}

double deg_to_cm(double angle_deg, double distance_cm) {
  require_distance(distance_cm);
  if (angle_deg < 0.0 || angle_deg >= 180.0) throw Error("deg_to_cm: angle out of range");
  return 2.0 * distance_cm * std::tan(angle_deg / (2.0 * kDegPerRad));
}

double half_angle_deg(double offset_cm, double distance_cm) {
  require_distance(distance_cm);
  return std::atan(offset_cm / distance_cm) * kDegPerRad;
}

HalfAngles screen_half_angles(const ViewingGeometry& g) {
  return {half_angle_deg(g.screen_w_cm / 2.0, g.distance_cm),
          half_angle_deg(g.screen_h_cm / 2.0, g.distance_cm)};
}

HalfAngles usable_half_angles(const ViewingGeometry& g, const DisplayLayout& layout) {
  return {half_angle_deg(g.screen_w_cm / 2.0 - layout.margin_h_cm, g.distance_cm),
          half_angle_deg(g.screen_h_cm / 2.0 - layout.margin_v_cm, g.distance_cm)};
}

GridSpec default_grid(const ViewingGeometry& g, const DisplayLayout& layout) {
  validate(g);
  const HalfAngles usable = usable_half_angles(g, layout);
  const HalfAngles screen = screen_half_angles(g);
  GridSpec grid;
  grid.cell_w_deg = 2.0 * usable.horizontal_deg / grid.cols;
  grid.cell_h_deg = 2.0 * usable.vertical_deg / grid.rows;
  grid.margin_h_deg = screen.horizontal_deg - usable.horizontal_deg;
  grid.margin_v_deg = screen.vertical_deg - usable.vertical_deg;
  grid.disc_radius_deg = cm_to_deg(layout.disc_size_cm, g.distance_cm) / 2.0;
  grid.jitter_max_deg = layout.jitter_deg;
  validate(grid);
  return grid;
}

PointPx deg_to_px(PointDeg p, const ViewingGeometry& g) {
  const double scale = g.distance_cm * g.px_per_cm();
  return {g.res_w_px / 2.0 + std::tan(p.x / kDegPerRad) * scale,
          g.res_h_px / 2.0 - std::tan(p.y / kDegPerRad) * scale};
}

PointDeg px_to_deg(PointPx p, const ViewingGeometry& g) {
  const double scale = g.distance_cm * g.px_per_cm();
  return {std::atan((p.x - g.res_w_px / 2.0) / scale) * kDegPerRad,
          std::atan((g.res_h_px / 2.0 - p.y) / scale) * kDegPerRad};
}

double radius_px(double radius_deg, const ViewingGeometry& g) {
  return deg_to_cm(2.0 * radius_deg, g.distance_cm) / 2.0 * g.px_per_cm();
}

}  // namespace deadeye
