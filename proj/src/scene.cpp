#include "deadeye/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "deadeye/error.hpp"
#include "deadeye/rng.hpp"

namespace deadeye {

double GridSpec::max_safe_jitter() const noexcept {
  return (std::min(cell_w_deg, cell_h_deg) - 2.0 * disc_radius_deg) / 2.0;
}

void validate(const GridSpec& grid) {
  if (grid.rows <= 0 || grid.cols <= 0) throw Error("grid: rows and cols must be positive");
  if (!(grid.cell_w_deg > 0.0) || !(grid.cell_h_deg > 0.0)) {
    throw Error("grid: cell size must be positive");
  }
  if (!(grid.disc_radius_deg > 0.0)) throw Error("grid: disc radius must be positive");
  if (grid.jitter_max_deg < 0.0) throw Error("grid: negative jitter");
  if (grid.jitter_max_deg > grid.max_safe_jitter() + 1e-12) {
    throw Error("grid: jitter " + std::to_string(grid.jitter_max_deg) +
                " deg lets discs leave their cell (max " +
                std::to_string(grid.max_safe_jitter()) + ")");
  }
}

void validate(const TrialCondition& c) {
  switch (c.experiment) {
    case Experiment::Preattentive:
      if (c.set_size != 4 && c.set_size != 8 && c.set_size != 16 && c.set_size != 30) {
        throw Error("preattentive set size must be 4, 8, 16 or 30");
      }
      if (c.target_eye.has_value() != c.target_present) {
        throw Error("preattentive target_eye must be set iff a target is present");
      }
      if (c.conjunction_target_kind) throw Error("preattentive trial with a conjunction kind");
      break;
    case Experiment::Conjunction:
      if (c.set_size != 4 && c.set_size != 8 && c.set_size != 16) {
        throw Error("conjunction set size must be 4, 8 or 16");
      }
      if (!c.target_eye) throw Error("conjunction trial without an eye assignment");
      if (c.conjunction_target_kind.has_value() != c.target_present) {
        throw Error("conjunction kind must be set iff a target is present");
      }
      break;
  }
  if (c.exposure.is_fixed() && c.exposure.ms <= 0) throw Error("fixed exposure must be positive");
}

const Disc* Stimulus::find(int disc_id) const noexcept {
  auto it = std::find_if(discs.begin(), discs.end(),
                         [disc_id](const Disc& d) { return d.id == disc_id; });
  return it == discs.end() ? nullptr : &*it;
}

void validate(const Stimulus& s) {
  std::set<int> ids;
  for (const Disc& d : s.discs) {
    if (!ids.insert(d.id).second) throw Error("duplicate disc id " + std::to_string(d.id));
    if (!(d.radius_deg > 0.0)) throw Error("disc " + std::to_string(d.id) + ": radius must be positive");
    if (!d.visible_left && !d.visible_right) {
      throw Error("disc " + std::to_string(d.id) + " is invisible to both eyes");
    }
  }
  if (s.target_id && !ids.contains(*s.target_id)) {
    throw Error("target_id " + std::to_string(*s.target_id) + " names no disc");
  }
  for (std::size_t i = 0; i < s.discs.size(); ++i) {
    for (std::size_t j = i + 1; j < s.discs.size(); ++j) {
      const Disc& a = s.discs[i];
      const Disc& b = s.discs[j];
      const double dist = std::hypot(a.center.x - b.center.x, a.center.y - b.center.y);
      if (dist < a.radius_deg + b.radius_deg) {
        throw Error("discs " + std::to_string(a.id) + " and " + std::to_string(b.id) + " overlap");
      }
    }
  }
  if (s.condition.experiment == Experiment::Preattentive) {
    for (const Disc& d : s.discs) {
      if (d.monocular() && d.id != s.target_id) {
        throw Error("preattentive non-target disc " + std::to_string(d.id) + " is monocular");
      }
    }
  }
}

Stimulus apply_deadeye(const Stimulus& stimulus, int disc_id, Eye hidden_eye) {
  const Disc* found = stimulus.find(disc_id);
  if (!found) throw Error("apply_deadeye: unknown disc id " + std::to_string(disc_id));
  if (found->monocular()) {
    throw Error("apply_deadeye: disc " + std::to_string(disc_id) + " is already monocular");
  }
  Stimulus out = stimulus;
  for (Disc& d : out.discs) {
    if (d.id != disc_id) continue;
    d.visible_left = hidden_eye != Eye::Left;
    d.visible_right = hidden_eye != Eye::Right;
  }
  out.target_id = disc_id;
  return out;
}

Stimulus conjunction_paint(const Stimulus& stimulus, std::uint64_t rng_seed,
                           std::optional<ConjunctionTarget> target_kind,
                           const Palette& palette) {
  const int n = static_cast<int>(stimulus.discs.size());
  if (n < 2) throw Error("conjunction_paint: set size must be at least 2");
  if (!stimulus.condition.target_eye) {
    throw Error("conjunction_paint: condition carries no eye assignment");
  }
  for (const Disc& d : stimulus.discs) {
    if (d.color != palette.distractor || d.monocular()) {
      throw Error("conjunction_paint: expects uniform yellow binocular discs");
    }
  }
  if (target_kind && !stimulus.target_id) {
    throw Error("conjunction_paint: target kind given but no target disc chosen");
  }

  const Eye shown = *stimulus.condition.target_eye;
  const int magenta_count = (n + 1) / 2;

  std::vector<int> pool;
  for (const Disc& d : stimulus.discs) {
    if (!target_kind || d.id != *stimulus.target_id) pool.push_back(d.id);
  }
  Rng rng(rng_seed);
  rng.shuffle(std::span<int>(pool));

  std::set<int> magenta;
  if (target_kind == ConjunctionTarget::MagentaPopout) magenta.insert(*stimulus.target_id);
  for (int id : pool) {
    if (static_cast<int>(magenta.size()) == magenta_count) break;
    magenta.insert(id);
  }

  Stimulus out = stimulus;
  out.condition.conjunction_target_kind = target_kind;
  out.condition.target_present = target_kind.has_value();
  if (!target_kind) out.target_id.reset();
  for (Disc& d : out.discs) {
    const bool is_magenta = magenta.contains(d.id);
    const bool is_target = target_kind && d.id == *stimulus.target_id;
    d.color = is_magenta ? palette.magenta : palette.distractor;
    // Monocular: yellow distractors and a magenta target. Binocular: magenta
    // distractors and a yellow target.
    const bool monocular = is_magenta == is_target;
    d.visible_left = !monocular || shown == Eye::Left;
    d.visible_right = !monocular || shown == Eye::Right;
  }
  return out;
}

}  // namespace deadeye
