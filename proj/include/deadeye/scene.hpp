#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "deadeye/grid.hpp"

namespace deadeye {

enum class Eye { Left, Right };

constexpr Eye other(Eye eye) noexcept {
  return eye == Eye::Left ? Eye::Right : Eye::Left;
}

struct ColorRgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const ColorRgb&, const ColorRgb&) = default;
};

struct Palette {
  ColorRgb background{0, 84, 159};
  ColorRgb distractor{255, 214, 0};
  ColorRgb magenta{227, 0, 102};
  ColorRgb crosshair{255, 255, 255};

  friend bool operator==(const Palette&, const Palette&) = default;
};

struct PointDeg {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PointDeg&, const PointDeg&) = default;
};

struct Disc {
  int id = 0;
  PointDeg center;
  double radius_deg = 0.0;
  ColorRgb color;
  bool visible_left = true;
  bool visible_right = true;
  GridCell cell;

  bool visible_to(Eye eye) const noexcept {
    return eye == Eye::Left ? visible_left : visible_right;
  }
  bool monocular() const noexcept { return visible_left != visible_right; }

  friend bool operator==(const Disc&, const Disc&) = default;
};

enum class Experiment { Preattentive, Conjunction };
enum class ConjunctionTarget { MagentaPopout, YellowNonPopout };

struct Exposure {
  enum class Kind { Fixed, UntilResponse };
  Kind kind = Kind::Fixed;
  int ms = 250;  // meaningful for Fixed only

  static Exposure fixed(int ms) { return {Kind::Fixed, ms}; }
  static Exposure until_response() { return {Kind::UntilResponse, 0}; }
  bool is_fixed() const noexcept { return kind == Kind::Fixed; }

  friend bool operator==(const Exposure&, const Exposure&) = default;
};

// `target_eye` is the eye the trial's monocular elements are rendered for.
// Preattentive trials carry it only when a target is present; conjunction
// trials always carry it because their yellow distractors are monocular even
// in target-absent displays.
struct TrialCondition {
  int set_size = 0;
  bool target_present = false;
  std::optional<Eye> target_eye;
  Experiment experiment = Experiment::Preattentive;
  std::optional<ConjunctionTarget> conjunction_target_kind;
  Exposure exposure;

  friend bool operator==(const TrialCondition&, const TrialCondition&) = default;
};

// Throws deadeye::Error on a condition that violates the experiment rules.
void validate(const TrialCondition& condition);

struct Stimulus {
  ColorRgb background;
  std::vector<Disc> discs;
  std::optional<int> target_id;
  GridSpec grid;
  TrialCondition condition;

  const Disc* find(int disc_id) const noexcept;
  const Disc* target() const noexcept {
    return target_id ? find(*target_id) : nullptr;
  }

  friend bool operator==(const Stimulus&, const Stimulus&) = default;
};

// Structural checks shared by every stimulus: unique ids, a valid target
// reference, no overlap and no disc hidden from both eyes. Preattentive
// stimuli additionally require every non-target disc to be binocular.
void validate(const Stimulus& stimulus);

// Hides `disc_id` from `hidden_eye` and makes it the target.
Stimulus apply_deadeye(const Stimulus& stimulus, int disc_id, Eye hidden_eye);

// Recolours a uniform yellow binocular display into the conjunction search
// display. ceil(n/2) discs become magenta; yellow non-targets become
// monocular for stimulus.condition.target_eye. With a target kind, the
// stimulus' target_id must already name the target disc.
Stimulus conjunction_paint(const Stimulus& stimulus, std::uint64_t rng_seed,
                           std::optional<ConjunctionTarget> target_kind,
                           const Palette& palette = {});

}  // namespace deadeye
