#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "deadeye/raster.hpp"
#include "deadeye/scene.hpp"

namespace deadeye::chart {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Series {
  std::string name;
  std::vector<Point> points;
};

struct AxisRange {
  double min = 0.0;
  double max = 1.0;
};

struct ChartSpec {
  std::vector<Series> series;
  // Unset ranges are taken from the data.
  std::optional<AxisRange> x_range;
  std::optional<AxisRange> y_range;

  int width_px = 960;
  int height_px = 540;
  int margin_px = 48;
  int stroke_px = 1;
  int ticks = 5;
  bool tick_labels = true;

  ColorRgb background{255, 255, 255};
  ColorRgb axis{0, 0, 0};
  std::vector<ColorRgb> palette{{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40},
                                {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {127, 127, 127}};

  std::set<std::string> highlight;
  Eye hidden_eye = Eye::Left;
};

// Throws deadeye::Error for empty series, unknown highlight names, duplicate
// names, non-finite coordinates or degenerate ranges.
void validate(const ChartSpec& spec);

// Header row names the series; the first column holds x. Empty cells are
// missing points.
std::vector<Series> parse_csv(std::string_view text);

// The chart as one eye would see it with `omit` series left out.
Raster render_chart(const ChartSpec& spec, const std::set<std::string>& omit = {});

// Both eyes get the full chart except that highlighted series are missing
// from hidden_eye. Series keep their drawing order, so the visible eye is the
// plain chart.
StereoPair render_chart_pair(const ChartSpec& spec);

// Pixels a series' stroke may touch (row-major, width_px * height_px).
std::vector<bool> stroke_mask(const ChartSpec& spec, const std::string& series);

// Left eye sees `a`, right eye sees `b`; any difference becomes monocular.
StereoPair compare_composite(const Raster& a, const Raster& b);

}  // namespace deadeye::chart
