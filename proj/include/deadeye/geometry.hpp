#pragma once

#include "deadeye/grid.hpp"
#include "deadeye/scene.hpp"

namespace deadeye {

// Physical display setup. Pixels are square; the horizontal extent defines
// the pixel pitch.
struct ViewingGeometry {
  double screen_w_cm = 122.40;
  double screen_h_cm = 74.10;
  int res_w_px = 1920;
  int res_h_px = 1080;
  double distance_cm = 280.0;

  double px_per_cm() const noexcept { return res_w_px / screen_w_cm; }

  friend bool operator==(const ViewingGeometry&, const ViewingGeometry&) = default;
};

void validate(const ViewingGeometry& geom);

// Where the search display sits on the screen.
struct DisplayLayout {
  double margin_h_cm = 17.44;
  double margin_v_cm = 11.48;
  double disc_size_cm = 4.59;
  double jitter_deg = 0.3;

  friend bool operator==(const DisplayLayout&, const DisplayLayout&) = default;
};

// Full visual angle subtended by an object of `size_cm` centred on the line of
// sight.
double cm_to_deg(double size_cm, double distance_cm);
double deg_to_cm(double angle_deg, double distance_cm);

// Angle between the line of sight and a point `offset_cm` away from the
// screen centre.
double half_angle_deg(double offset_cm, double distance_cm);

struct HalfAngles {
  double horizontal_deg = 0.0;
  double vertical_deg = 0.0;
};

HalfAngles screen_half_angles(const ViewingGeometry& geom);
HalfAngles usable_half_angles(const ViewingGeometry& geom, const DisplayLayout& layout);

// 5x6 grid filling the usable area.
GridSpec default_grid(const ViewingGeometry& geom = {}, const DisplayLayout& layout = {});

struct PointPx {
  double x = 0.0;
  double y = 0.0;
};

// Screen mapping for eccentricities given in degrees. +y is up in degrees and
// down in pixels.
PointPx deg_to_px(PointDeg p, const ViewingGeometry& geom);
PointDeg px_to_deg(PointPx p, const ViewingGeometry& geom);

// Pixel radius of a disc subtending `2 * radius_deg`.
double radius_px(double radius_deg, const ViewingGeometry& geom);

}  // namespace deadeye
