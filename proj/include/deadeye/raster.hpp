#pragma once

#include <cstdint>
#include <vector>

#include "deadeye/scene.hpp"

namespace deadeye {

// Row-major RGB8 image.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, ColorRgb fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  ColorRgb at(int x, int y) const noexcept {
    const std::uint8_t* p = &pixels_[offset(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, ColorRgb c) noexcept {
    std::uint8_t* p = &pixels_[offset(x, y)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  void fill(ColorRgb c);

  const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }
  std::vector<std::uint8_t>& pixels() noexcept { return pixels_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool contains(int x, int y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

struct StereoPair {
  Raster left;
  Raster right;

  const Raster& eye(Eye e) const noexcept { return e == Eye::Left ? left : right; }

  friend bool operator==(const StereoPair&, const StereoPair&) = default;
};

}  // namespace deadeye
