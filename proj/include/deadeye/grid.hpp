#pragma once

namespace deadeye {

struct GridCell {
  int row = 0;
  int col = 0;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

// Jittered layout grid, in degrees of visual angle centred on the fixation
// point. Row 0 is the top row, column 0 the leftmost column.
struct GridSpec {
  int rows = 5;
  int cols = 6;
  double cell_w_deg = 0.0;
  double cell_h_deg = 0.0;
  double margin_h_deg = 0.0;
  double margin_v_deg = 0.0;
  double jitter_max_deg = 0.0;
  double disc_radius_deg = 0.0;

  int cell_count() const noexcept { return rows * cols; }
  double cell_center_x(int col) const noexcept {
    return (col - (cols - 1) / 2.0) * cell_w_deg;
  }
  double cell_center_y(int row) const noexcept {
    return ((rows - 1) / 2.0 - row) * cell_h_deg;
  }
  // Largest jitter that keeps every disc inside its own cell.
  double max_safe_jitter() const noexcept;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Throws deadeye::Error when dimensions are non-positive or the jitter lets a
// disc leave its cell.
void validate(const GridSpec& grid);

}  // namespace deadeye
