#pragma once

#include <cstdint>
#include <vector>

#include "deadeye/geometry.hpp"
#include "deadeye/grid.hpp"
#include "deadeye/scene.hpp"

namespace deadeye {

// Default plan seed. Every participant of a study run with this seed sees the
// same trial sequence and the same layouts.
inline constexpr std::uint64_t kCanonicalSeed = 20190705;
inline constexpr int kTrialsPerBlock = 48;
inline constexpr int kFixedExposureMs = 250;

struct LayoutSlot {
  GridCell cell;
  PointDeg center;
};

// Picks `set_size` distinct cells uniformly and jitters each disc inside its
// cell. Deterministic in `seed`.
std::vector<LayoutSlot> generate_layout(const GridSpec& grid, int set_size, std::uint64_t seed);

struct PlannedTrial {
  TrialCondition condition;
  std::uint64_t layout_seed = 0;

  friend bool operator==(const PlannedTrial&, const PlannedTrial&) = default;
};

struct Block {
  int set_size = 0;
  std::vector<PlannedTrial> trials;

  friend bool operator==(const Block&, const Block&) = default;
};

struct TrialPlan {
  Experiment experiment = Experiment::Preattentive;
  std::uint64_t seed = kCanonicalSeed;
  std::vector<Block> blocks;
  GridSpec grid;
  Palette palette;

  std::size_t size() const noexcept;
  const PlannedTrial& at(std::size_t index) const;
  std::size_t block_of(std::size_t index) const;
  // Global index of the first trial in each block.
  std::vector<std::size_t> block_starts() const;

  friend bool operator==(const TrialPlan&, const TrialPlan&) = default;
};

// Checks the balancing contract; throws deadeye::Error on violation.
void validate(const TrialPlan& plan);

// 4/8/16/30 for the preattentive experiment, 4/8/16 for conjunction search.
std::vector<int> set_sizes(Experiment experiment);

struct PlanOptions {
  GridSpec grid = default_grid();
  Palette palette;
  // Presentation order of the set-size blocks. Empty means ascending.
  std::vector<int> block_order;
};

TrialPlan generate_plan(Experiment experiment, std::uint64_t seed, const PlanOptions& options = {});

// Builds the stimulus for trial `index`: layout, target choice and the
// Deadeye or conjunction transform.
Stimulus instantiate_trial(const TrialPlan& plan, std::size_t index);

}  // namespace deadeye
