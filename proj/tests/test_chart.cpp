#include <doctest.h>

#include <cmath>

#include "deadeye/chart.hpp"
#include "deadeye/error.hpp"
#include "deadeye/rng.hpp"

using namespace deadeye;
using namespace deadeye::chart;

namespace {

ChartSpec random_spec(Rng& rng) {
  ChartSpec spec;
  spec.width_px = 320 + static_cast<int>(rng.below(200));
  spec.height_px = 200 + static_cast<int>(rng.below(120));
  spec.stroke_px = 1 + static_cast<int>(rng.below(4));
  const int n = 2 + static_cast<int>(rng.below(4));
  for (int s = 0; s < n; ++s) {
    Series series{"s" + std::to_string(s), {}};
    double y = rng.normal(0, 1);
    for (int i = 0; i < 25; ++i) {
      y += rng.normal(0, 0.5);
      series.points.push_back({static_cast<double>(i), y});
    }
    spec.series.push_back(series);
  }
  spec.highlight.insert("s" + std::to_string(rng.below(n)));
  if (rng.below(3) == 0) spec.highlight.insert("s0");
  spec.hidden_eye = rng.below(2) ? Eye::Left : Eye::Right;
  return spec;
}

const Raster& eye(const StereoPair& p, Eye e) { return e == Eye::Left ? p.left : p.right; }

}  // namespace

TEST_CASE("highlighting only removes the highlighted strokes from the hidden eye") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const ChartSpec spec = random_spec(rng);
    const StereoPair pair = render_chart_pair(spec);
    const Eye visible = spec.hidden_eye == Eye::Left ? Eye::Right : Eye::Left;

    ChartSpec plain = spec;
    plain.highlight.clear();
    CHECK(eye(pair, visible) == render_chart(plain));
    CHECK(eye(pair, spec.hidden_eye) == render_chart(spec, spec.highlight));

    std::vector<bool> mask(static_cast<std::size_t>(spec.width_px * spec.height_px), false);
    for (const std::string& name : spec.highlight) {
      const std::vector<bool> m = stroke_mask(spec, name);
      REQUIRE(m.size() == mask.size());
      for (std::size_t i = 0; i < m.size(); ++i) mask[i] = mask[i] || m[i];
    }
    std::size_t diff = 0, outside = 0;
    for (int y = 0; y < spec.height_px; ++y) {
      for (int x = 0; x < spec.width_px; ++x) {
        if (pair.left.at(x, y) == pair.right.at(x, y)) continue;
        ++diff;
        outside += !mask[static_cast<std::size_t>(y * spec.width_px + x)];
      }
    }
    CHECK(diff > 0);
    CHECK(outside == 0);
  }
}

TEST_CASE("no highlight means identical eyes") {
  Rng rng(3);
  ChartSpec spec = random_spec(rng);
  spec.highlight.clear();
  const StereoPair pair = render_chart_pair(spec);
  CHECK(pair.left == pair.right);
}

TEST_CASE("stroke mask covers the drawn series") {
  ChartSpec spec;
  spec.series = {{"a", {{0, 0}, {1, 1}}}};
  spec.stroke_px = 3;
  const Raster r = render_chart(spec);
  const std::vector<bool> m = stroke_mask(spec, "a");
  std::size_t colored = 0;
  for (int y = 0; y < spec.height_px; ++y)
    for (int x = 0; x < spec.width_px; ++x) {
      if (r.at(x, y) == spec.palette[0]) {
        ++colored;
        CHECK(m[static_cast<std::size_t>(y * spec.width_px + x)]);
      }
    }
  CHECK(colored > 0);
  CHECK_THROWS_AS(stroke_mask(spec, "zzz"), Error);
}

TEST_CASE("chart validation") {
  ChartSpec spec;
  CHECK_THROWS_AS(validate(spec), Error);
  spec.series = {{"a", {{0, 1}, {1, 2}}}, {"b", {{0, 3}}}};
  CHECK_NOTHROW(validate(spec));
  ChartSpec bad = spec;
  bad.series.push_back({"a", {{0, 0}}});
  CHECK_THROWS_AS(validate(bad), Error);
  bad = spec;
  bad.highlight = {"c"};
  CHECK_THROWS_AS(validate(bad), Error);
  bad = spec;
  bad.series[0].points.push_back({2, NAN});
  CHECK_THROWS_AS(validate(bad), Error);
  bad = spec;
  bad.x_range = AxisRange{1, 1};
  CHECK_THROWS_AS(validate(bad), Error);
  bad = spec;
  bad.stroke_px = 0;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = spec;
  bad.width_px = 10;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = spec;
  bad.series[1].points.clear();
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("csv parsing") {
  const auto series = parse_csv("x,alpha,beta\n0,1,2\n1,,3\n2,4,5\n");
  REQUIRE(series.size() == 2);
  CHECK(series[0].name == "alpha");
  CHECK(series[0].points.size() == 2);
  CHECK(series[1].points.size() == 3);
  CHECK(series[0].points[1].x == 2.0);
  CHECK(series[0].points[1].y == 4.0);
  CHECK(parse_csv("x,a\r\n0,1\r\n").at(0).points.size() == 1);

  try {
    parse_csv("x,a\n0,1\n1,abc\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_csv(""), Error);
  CHECK_THROWS_AS(parse_csv("x\n1\n"), Error);
  CHECK_THROWS_AS(parse_csv("x,a\n1,2,3\n"), Error);
}

TEST_CASE("compare composite") {
  Raster a(40, 30, {255, 255, 255});
  const StereoPair same = compare_composite(a, a);
  CHECK(same.left == same.right);

  Raster b = a;
  b.set(7, 11, {0, 0, 0});
  const StereoPair one = compare_composite(a, b);
  std::size_t diff = 0;
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) diff += !(one.left.at(x, y) == one.right.at(x, y));
  CHECK(diff == 1);
  CHECK_FALSE(one.left.at(7, 11) == one.right.at(7, 11));

  const StereoPair swapped = compare_composite(b, a);
  CHECK(swapped.left == one.right);
  CHECK(swapped.right == one.left);

  CHECK_THROWS_AS(compare_composite(a, Raster(41, 30)), Error);
}
