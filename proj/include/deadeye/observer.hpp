#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "deadeye/protocol.hpp"
#include "deadeye/scene.hpp"
#include "deadeye/session.hpp"
#include "deadeye/stimgen.hpp"

namespace deadeye {

// Parallel search: detection does not depend on the number of distractors.
// Latency is log-normal and only matters in until-response trials.
struct PreattentiveObserver {
  double hit_rate = 0.85;
  double correct_rejection_rate = 0.93;
  double rt_mean_ms = 650.0;
  double rt_sd_ms = 200.0;
  // Optional drop in hit rate per degree of target eccentricity.
  double eccentricity_hit_slope = 0.0;

  friend bool operator==(const PreattentiveObserver&, const PreattentiveObserver&) = default;
};

// Self-terminating serial scan in random order. Each inspection costs
// per_item_ms; an inspected target is recognised with item_detect_prob; after
// each unsuccessful inspection the observer gives up (answers "no") with
// probability lapse_per_item. Exhausting all items also yields "no".
struct SerialObserver {
  double base_ms = 1545.0;
  double per_item_ms = 209.0;
  double item_detect_prob = 0.79;
  double lapse_per_item = 0.056;
  double motor_sd_ms = 200.0;

  friend bool operator==(const SerialObserver&, const SerialObserver&) = default;
};

using ObserverModel = std::variant<PreattentiveObserver, SerialObserver>;

void validate(const ObserverModel& model);

struct ObserverResponse {
  bool answer = false;
  double rt_ms = 0.0;
  int inspected = 0;  // serial observer only
};

ObserverResponse respond(const ObserverModel& model, const TrialCondition& condition,
                         std::uint64_t seed, double target_eccentricity_deg = 0.0);

// Drives run_session with a simulated observer; the trial seed is derived
// from (seed, trial index).
class SimulatedResponder final : public Responder {
 public:
  SimulatedResponder(ObserverModel model, std::uint64_t seed) : model_(std::move(model)), seed_(seed) {}

  std::optional<ResponseDecision> respond(const Stimulus& stimulus, std::size_t trial_index) override;

 private:
  ObserverModel model_;
  std::uint64_t seed_;
};

struct CohortOptions {
  // Between-subject parameter spread: absolute SD on probabilities and a
  // coefficient of variation on times.
  double probability_jitter_sd = 0.04;
  double time_jitter_cv = 0.15;
  double right_dominant_share = 16.0 / 21.0;
  TimingConfig timing;
};

// Observer model of one cohort member after between-subject jitter.
ObserverModel jitter_observer(const ObserverModel& model, const CohortOptions& options, std::uint64_t seed);

std::vector<SessionLog> simulate_cohort(const ObserverModel& model, const TrialPlan& plan, int n_subjects,
                                        std::uint64_t seed, const CohortOptions& options = {});

}  // namespace deadeye
