#include "deadeye/stimgen.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "deadeye/error.hpp"
#include "deadeye/rng.hpp"

namespace deadeye {

namespace {

// Stream ids for derive_seed.
constexpr std::uint64_t kTargetStream = 1;
constexpr std::uint64_t kPaintStream = 2;
constexpr std::uint64_t kBlockStream = 0x10000;

std::vector<TrialCondition> block_conditions(Experiment experiment, int set_size) {
  std::vector<TrialCondition> out;
  out.reserve(kTrialsPerBlock);
  auto add = [&](int count, bool present, std::optional<Eye> eye,
                 std::optional<ConjunctionTarget> kind) {
    for (int i = 0; i < count; ++i) {
      TrialCondition c;
      c.set_size = set_size;
      c.target_present = present;
      c.target_eye = eye;
      c.experiment = experiment;
      c.conjunction_target_kind = kind;
      c.exposure = experiment == Experiment::Preattentive ? Exposure::fixed(kFixedExposureMs)
                                                          : Exposure::until_response();
      out.push_back(c);
    }
  };
  if (experiment == Experiment::Preattentive) {
    add(12, true, Eye::Left, std::nullopt);
    add(12, true, Eye::Right, std::nullopt);
    add(24, false, std::nullopt, std::nullopt);
  } else {
    for (ConjunctionTarget kind : {ConjunctionTarget::MagentaPopout, ConjunctionTarget::YellowNonPopout}) {
      add(6, true, Eye::Left, kind);
      add(6, true, Eye::Right, kind);
    }
    add(12, false, Eye::Left, std::nullopt);
    add(12, false, Eye::Right, std::nullopt);
  }
  return out;
}

}  // namespace

std::vector<LayoutSlot> generate_layout(const GridSpec& grid, int set_size, std::uint64_t seed) {
  validate(grid);
  if (set_size < 1 || set_size > grid.cell_count()) {
    throw Error("generate_layout: set size " + std::to_string(set_size) + " outside [1, " +
                std::to_string(grid.cell_count()) + "]");
  }
  Rng rng(seed);
  std::vector<int> cells(static_cast<std::size_t>(grid.cell_count()));
  std::iota(cells.begin(), cells.end(), 0);
  // Partial Fisher-Yates: the first set_size entries are a uniform sample.
  for (int i = 0; i < set_size; ++i) {
    const auto j = i + static_cast<int>(rng.below(cells.size() - i));
    std::swap(cells[i], cells[j]);
  }
  std::vector<LayoutSlot> out;
  out.reserve(set_size);
  for (int i = 0; i < set_size; ++i) {
    const GridCell cell{cells[i] / grid.cols, cells[i] % grid.cols};
    const double jx = rng.uniform(-grid.jitter_max_deg, grid.jitter_max_deg);
    const double jy = rng.uniform(-grid.jitter_max_deg, grid.jitter_max_deg);
    out.push_back({cell, {grid.cell_center_x(cell.col) + jx, grid.cell_center_y(cell.row) + jy}});
  }
  return out;
}

std::size_t TrialPlan::size() const noexcept {
  std::size_t n = 0;
  for (const Block& b : blocks) n += b.trials.size();
  return n;
}

const PlannedTrial& TrialPlan::at(std::size_t index) const {
  for (const Block& b : blocks) {
    if (index < b.trials.size()) return b.trials[index];
    index -= b.trials.size();
  }
  throw Error("trial index out of range");
}

std::size_t TrialPlan::block_of(std::size_t index) const {
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (index < blocks[k].trials.size()) return k;
    index -= blocks[k].trials.size();
  }
  throw Error("trial index out of range");
}

std::vector<std::size_t> TrialPlan::block_starts() const {
  std::vector<std::size_t> starts;
  std::size_t at = 0;
  for (const Block& b : blocks) {
    starts.push_back(at);
    at += b.trials.size();
  }
  return starts;
}

std::vector<int> set_sizes(Experiment experiment) {
  if (experiment == Experiment::Preattentive) return {4, 8, 16, 30};
  return {4, 8, 16};
}

void validate(const TrialPlan& plan) {
  validate(plan.grid);
  std::vector<int> seen;
  for (const Block& b : plan.blocks) {
    const std::string where = "block set_size=" + std::to_string(b.set_size) + ": ";
    if (b.trials.size() != kTrialsPerBlock) throw Error(where + "expected 48 trials");
    int present = 0, left = 0, magenta = 0, magenta_left = 0, yellow_left = 0;
    for (const PlannedTrial& t : b.trials) {
      const TrialCondition& c = t.condition;
      validate(c);
      if (c.experiment != plan.experiment || c.set_size != b.set_size) {
        throw Error(where + "trial does not belong to this block");
      }
      if (!c.target_present) continue;
      ++present;
      const bool is_left = c.target_eye == Eye::Left;
      left += is_left;
      if (c.conjunction_target_kind == ConjunctionTarget::MagentaPopout) {
        ++magenta;
        magenta_left += is_left;
      } else if (c.conjunction_target_kind == ConjunctionTarget::YellowNonPopout) {
        yellow_left += is_left;
      }
    }
    if (present != 24) throw Error(where + "expected 24 target-present trials");
    if (left != 12) throw Error(where + "expected 12 left-eye targets");
    if (plan.experiment == Experiment::Conjunction &&
        (magenta != 12 || magenta_left != 6 || yellow_left != 6)) {
      throw Error(where + "conjunction kinds are unbalanced");
    }
    seen.push_back(b.set_size);
  }
  std::sort(seen.begin(), seen.end());
  if (seen != set_sizes(plan.experiment)) throw Error("plan: set-size blocks incomplete");
}

TrialPlan generate_plan(Experiment experiment, std::uint64_t seed, const PlanOptions& options) {
  std::vector<int> order = options.block_order.empty() ? set_sizes(experiment) : options.block_order;
  {
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != set_sizes(experiment)) throw Error("generate_plan: block order is not a permutation of the set sizes");
  }
  TrialPlan plan;
  plan.experiment = experiment;
  plan.seed = seed;
  plan.grid = options.grid;
  plan.palette = options.palette;
  std::uint64_t index = 0;
  for (int set_size : order) {
    std::vector<TrialCondition> conditions = block_conditions(experiment, set_size);
    Rng rng(derive_seed(seed, kBlockStream + static_cast<std::uint64_t>(set_size)));
    rng.shuffle(std::span<TrialCondition>(conditions));
    Block block{set_size, {}};
    for (const TrialCondition& c : conditions) {
      block.trials.push_back({c, derive_seed(seed, index++)});
    }
    plan.blocks.push_back(std::move(block));
  }
  validate(plan);
  return plan;
}

Stimulus instantiate_trial(const TrialPlan& plan, std::size_t index) {
  if (index >= plan.size()) throw Error("instantiate_trial: index " + std::to_string(index) + " out of range");
  const PlannedTrial& trial = plan.at(index);
  const TrialCondition& c = trial.condition;

  Stimulus s;
  s.background = plan.palette.background;
  s.grid = plan.grid;
  s.condition = c;
  const std::vector<LayoutSlot> layout = generate_layout(plan.grid, c.set_size, trial.layout_seed);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    Disc d;
    d.id = static_cast<int>(i);
    d.center = layout[i].center;
    d.radius_deg = plan.grid.disc_radius_deg;
    d.color = plan.palette.distractor;
    d.cell = layout[i].cell;
    s.discs.push_back(d);
  }

  Rng rng(derive_seed(trial.layout_seed, kTargetStream));
  const int target = static_cast<int>(rng.below(layout.size()));

  if (c.experiment == Experiment::Preattentive) {
    if (!c.target_present) return s;
    return apply_deadeye(s, target, other(*c.target_eye));
  }
  if (c.target_present) s.target_id = target;
  return conjunction_paint(s, derive_seed(trial.layout_seed, kPaintStream),
                           c.conjunction_target_kind, plan.palette);
}

}  // namespace deadeye
