#include "deadeye/chart.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "deadeye/error.hpp"

namespace deadeye::chart {

namespace {

struct Frame {
  int x0, y0, x1, y1;  // plot area, half-open
  AxisRange xr, yr;
};

AxisRange data_range(const ChartSpec& spec, bool x_axis) {
  double lo = INFINITY, hi = -INFINITY;
  for (const Series& s : spec.series) {
    for (const Point& p : s.points) {
      const double v = x_axis ? p.x : p.y;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

// Ranges come from every series, highlighted or not, so both eyes share the
// same axes.
Frame frame_of(const ChartSpec& spec) {
  Frame f;
  f.x0 = spec.margin_px;
  f.y0 = spec.margin_px / 2;
  f.x1 = spec.width_px - spec.margin_px / 2;
  f.y1 = spec.height_px - spec.margin_px;
  f.xr = spec.x_range.value_or(data_range(spec, true));
  f.yr = spec.y_range.value_or(data_range(spec, false));
  return f;
}

int map_x(const Frame& f, double x) {
  return f.x0 + static_cast<int>(std::lround((x - f.xr.min) / (f.xr.max - f.xr.min) * (f.x1 - f.x0 - 1)));
}

int map_y(const Frame& f, double y) {
  return f.y1 - 1 - static_cast<int>(std::lround((y - f.yr.min) / (f.yr.max - f.yr.min) * (f.y1 - f.y0 - 1)));
}

using Plot = std::function<void(int, int)>;

void stamp(int x, int y, int width, const Plot& plot) {
  const int lo = -(width - 1) / 2;
  for (int dy = lo; dy < lo + width; ++dy) {
    for (int dx = lo; dx < lo + width; ++dx) plot(x + dx, y + dy);
  }
}

void bresenham(int x0, int y0, int x1, int y1, int width, const Plot& plot) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    stamp(x0, y0, width, plot);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void stroke_series(const ChartSpec& spec, const Frame& f, const Series& s, const Plot& plot) {
  const Plot clipped = [&](int x, int y) {
    if (x >= f.x0 && x < f.x1 && y >= f.y0 && y < f.y1) plot(x, y);
  };
  if (s.points.size() == 1) {
    stamp(map_x(f, s.points[0].x), map_y(f, s.points[0].y), spec.stroke_px, clipped);
    return;
  }
  for (std::size_t i = 1; i < s.points.size(); ++i) {
    bresenham(map_x(f, s.points[i - 1].x), map_y(f, s.points[i - 1].y), map_x(f, s.points[i].x),
              map_y(f, s.points[i].y), spec.stroke_px, clipped);
  }
}

// 3x5 glyphs, one row per 3 bits, top row first.
const std::array<std::uint16_t, 14>& glyphs() {
  static const std::array<std::uint16_t, 14> g{
      0b111101101101111, 0b010110010010111, 0b111001111100111, 0b111001111001111, 0b101101111001001,
      0b111100111001111, 0b111100111101111, 0b111001001001001, 0b111101111101111, 0b111101111001111,
      0b000000111000000,  // -
      0b000000000000010,  // .
      0b000111101110011,  // e
      0b000010111010000,  // +
  };
  return g;
}

int glyph_index(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  switch (c) {
    case '-': return 10;
    case '.': return 11;
    case 'e': return 12;
    case '+': return 13;
  }
  return -1;
}

constexpr int kScale = 2;
constexpr int kAdvance = 4 * kScale;

void draw_text(Raster& r, int x, int y, const std::string& s, ColorRgb c) {
  for (char ch : s) {
    const int gi = glyph_index(ch);
    if (gi >= 0) {
      const std::uint16_t bits = glyphs()[static_cast<std::size_t>(gi)];
      for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 3; ++col) {
          if (!(bits >> (14 - (row * 3 + col)) & 1)) continue;
          for (int sy = 0; sy < kScale; ++sy) {
            for (int sx = 0; sx < kScale; ++sx) {
              const int px = x + col * kScale + sx, py = y + row * kScale + sy;
              if (r.contains(px, py)) r.set(px, py, c);
            }
          }
        }
      }
    }
    x += kAdvance;
  }
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

void draw_axes(const ChartSpec& spec, const Frame& f, Raster& r) {
  auto put = [&](int x, int y) {
    if (r.contains(x, y)) r.set(x, y, spec.axis);
  };
  for (int y = f.y0; y <= f.y1; ++y) put(f.x0 - 1, y);
  for (int x = f.x0 - 1; x < f.x1; ++x) put(x, f.y1);
  if (spec.ticks < 2) return;
  for (int i = 0; i < spec.ticks; ++i) {
    const double t = static_cast<double>(i) / (spec.ticks - 1);
    const double xv = f.xr.min + t * (f.xr.max - f.xr.min);
    const double yv = f.yr.min + t * (f.yr.max - f.yr.min);
    const int tx = map_x(f, xv), ty = map_y(f, yv);
    for (int k = 1; k <= 4; ++k) {
      put(tx, f.y1 + k);
      put(f.x0 - 1 - k, ty);
    }
    if (spec.tick_labels) {
      const std::string xl = tick_label(xv), yl = tick_label(yv);
      draw_text(r, tx - static_cast<int>(xl.size()) * kAdvance / 2, f.y1 + 8, xl, spec.axis);
      draw_text(r, f.x0 - 8 - static_cast<int>(yl.size()) * kAdvance, ty - 5, yl, spec.axis);
    }
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& s, std::size_t line, std::size_t col) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error("csv line " + std::to_string(line) + ", column " + std::to_string(col) + ": '" + s +
                "' is not a number");
  }
  return v;
}

}  // namespace

void validate(const ChartSpec& spec) {
  if (spec.series.empty()) throw Error("chart has no series");
  std::set<std::string> names;
  for (const Series& s : spec.series) {
    if (s.points.empty()) throw Error("series '" + s.name + "' is empty");
    if (!names.insert(s.name).second) throw Error("duplicate series name '" + s.name + "'");
    for (const Point& p : s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error("series '" + s.name + "' has a non-finite point");
    }
  }
  for (const std::string& h : spec.highlight) {
    if (!names.count(h)) throw Error("highlighted series '" + h + "' does not exist");
  }
  for (const auto& r : {spec.x_range, spec.y_range}) {
    if (r && !(std::isfinite(r->min) && std::isfinite(r->max) && r->min < r->max)) {
      throw Error("axis range must be finite with min < max");
    }
  }
  if (spec.stroke_px < 1) throw Error("stroke width must be at least 1 pixel");
  if (spec.margin_px < 0 || spec.width_px - spec.margin_px * 3 / 2 < 2 || spec.height_px - spec.margin_px * 3 / 2 < 2) {
    throw Error("chart is too small for its margins");
  }
  if (spec.palette.empty()) throw Error("chart palette is empty");
}

std::vector<Series> parse_csv(std::string_view text) {
  std::vector<Series> series;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header = true;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (header) {
      if (cells.size() < 2) throw Error("csv header needs an x column and at least one series");
      for (std::size_t i = 1; i < cells.size(); ++i) series.push_back({cells[i], {}});
      header = false;
      continue;
    }
    if (cells.size() != series.size() + 1) {
      throw Error("csv line " + std::to_string(line_no) + ": expected " + std::to_string(series.size() + 1) +
                  " cells, got " + std::to_string(cells.size()));
    }
    const double x = parse_number(cells[0], line_no, 1);
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (cells[i].empty()) continue;
      series[i - 1].points.push_back({x, parse_number(cells[i], line_no, i + 1)});
    }
  }
  if (header) throw Error("csv is empty");
  return series;
}

Raster render_chart(const ChartSpec& spec, const std::set<std::string>& omit) {
  validate(spec);
  const Frame f = frame_of(spec);
  Raster r(spec.width_px, spec.height_px, spec.background);
  draw_axes(spec, f, r);
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const Series& s = spec.series[i];
    if (omit.count(s.name)) continue;
    const ColorRgb c = spec.palette[i % spec.palette.size()];
    stroke_series(spec, f, s, [&](int x, int y) { r.set(x, y, c); });
  }
  return r;
}

StereoPair render_chart_pair(const ChartSpec& spec) {
  Raster full = render_chart(spec);
  Raster reduced = render_chart(spec, spec.highlight);
  if (spec.hidden_eye == Eye::Left) return {std::move(reduced), std::move(full)};
  return {std::move(full), std::move(reduced)};
}

std::vector<bool> stroke_mask(const ChartSpec& spec, const std::string& name) {
  validate(spec);
  const Frame f = frame_of(spec);
  std::vector<bool> mask(static_cast<std::size_t>(spec.width_px) * spec.height_px, false);
  for (const Series& s : spec.series) {
    if (s.name != name) continue;
    stroke_series(spec, f, s, [&](int x, int y) { mask[static_cast<std::size_t>(y) * spec.width_px + x] = true; });
    return mask;
  }
  throw Error("unknown series '" + name + "'");
}

StereoPair compare_composite(const Raster& a, const Raster& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error("compare images differ in size: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
  return {a, b};
}

}  // namespace deadeye::chart
