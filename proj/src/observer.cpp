#include "deadeye/observer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "deadeye/error.hpp"
#include "deadeye/rng.hpp"

namespace deadeye {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

double lognormal(Rng& rng, double mean, double sd) {
  if (sd <= 0.0) return mean;
  const double sigma2 = std::log1p((sd * sd) / (mean * mean));
  const double mu = std::log(mean) - sigma2 / 2.0;
  return std::exp(rng.normal(mu, std::sqrt(sigma2)));
}

ObserverResponse respond_parallel(const PreattentiveObserver& o, const TrialCondition& c, Rng& rng,
                                  double eccentricity) {
  ObserverResponse out;
  if (c.target_present) {
    out.answer = rng.bernoulli(clamp01(o.hit_rate - o.eccentricity_hit_slope * eccentricity));
  } else {
    out.answer = !rng.bernoulli(o.correct_rejection_rate);
  }
  out.rt_ms = lognormal(rng, o.rt_mean_ms, o.rt_sd_ms);
  return out;
}

ObserverResponse respond_serial(const SerialObserver& o, const TrialCondition& c, Rng& rng) {
  const int n = c.set_size;
  // Scan order is a uniform permutation, so the target's position in it is
  // uniform over 1..n.
  const int target_pos = c.target_present ? 1 + static_cast<int>(rng.below(n)) : 0;
  ObserverResponse out;
  for (int i = 1; i <= n; ++i) {
    ++out.inspected;
    if (i == target_pos && rng.bernoulli(o.item_detect_prob)) {
      out.answer = true;
      break;
    }
    if (i < n && rng.bernoulli(o.lapse_per_item)) break;
  }
  const double noise = o.motor_sd_ms > 0.0 ? rng.normal(0.0, o.motor_sd_ms) : 0.0;
  out.rt_ms = std::max(0.0, o.base_ms + out.inspected * o.per_item_ms + noise);
  return out;
}

}  // namespace

void validate(const ObserverModel& model) {
  std::visit(
      [](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, PreattentiveObserver>) {
          if (!is_probability(o.hit_rate) || !is_probability(o.correct_rejection_rate)) {
            throw Error("preattentive observer: rates must lie in [0,1]");
          }
          if (!(o.rt_mean_ms > 0.0) || o.rt_sd_ms < 0.0) throw Error("preattentive observer: bad latency");
        } else {
          if (!(o.base_ms > 0.0) || !(o.per_item_ms > 0.0) || o.motor_sd_ms < 0.0) {
            throw Error("serial observer: times must be positive");
          }
          if (!is_probability(o.item_detect_prob) || !is_probability(o.lapse_per_item)) {
            throw Error("serial observer: probabilities must lie in [0,1]");
          }
        }
      },
      model);
}

ObserverResponse respond(const ObserverModel& model, const TrialCondition& condition, std::uint64_t seed,
                         double target_eccentricity_deg) {
  Rng rng(seed);
  return std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, PreattentiveObserver>) {
          return respond_parallel(o, condition, rng, target_eccentricity_deg);
        } else {
          return respond_serial(o, condition, rng);
        }
      },
      model);
}

std::optional<ResponseDecision> SimulatedResponder::respond(const Stimulus& stimulus, std::size_t trial_index) {
  double eccentricity = 0.0;
  if (const Disc* t = stimulus.target()) eccentricity = std::hypot(t->center.x, t->center.y);
  const ObserverResponse r =
      deadeye::respond(model_, stimulus.condition, derive_seed(seed_, trial_index), eccentricity);
  return ResponseDecision{r.answer, r.rt_ms};
}

ObserverModel jitter_observer(const ObserverModel& model, const CohortOptions& options, std::uint64_t seed) {
  Rng rng(seed);
  auto prob = [&](double p) { return clamp01(rng.normal(p, options.probability_jitter_sd)); };
  auto time = [&](double t) { return std::max(1.0, t * (1.0 + rng.normal(0.0, options.time_jitter_cv))); };
  return std::visit(
      [&](auto o) -> ObserverModel {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, PreattentiveObserver>) {
          o.hit_rate = prob(o.hit_rate);
          o.correct_rejection_rate = prob(o.correct_rejection_rate);
          o.rt_mean_ms = time(o.rt_mean_ms);
        } else {
          o.item_detect_prob = prob(o.item_detect_prob);
          o.base_ms = time(o.base_ms);
          o.per_item_ms = time(o.per_item_ms);
        }
        return o;
      },
      model);
}

std::vector<SessionLog> simulate_cohort(const ObserverModel& model, const TrialPlan& plan, int n_subjects,
                                        std::uint64_t seed, const CohortOptions& options) {
  if (n_subjects < 2) throw Error("simulate_cohort: need at least 2 subjects");
  validate(model);
  std::vector<SessionLog> logs;
  logs.reserve(static_cast<std::size_t>(n_subjects));
  for (int i = 0; i < n_subjects; ++i) {
    const std::uint64_t subject_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    Rng meta(derive_seed(subject_seed, 0xA11CE));
    SessionOptions session;
    session.mode = SessionMode::Recorded;
    session.timing = options.timing;
    char id[32];
    std::snprintf(id, sizeof id, "sim-%03d", i + 1);
    session.participant.id = id;
    session.participant.age = 18 + static_cast<int>(meta.below(25));
    session.participant.dominant_eye = meta.bernoulli(options.right_dominant_share) ? Eye::Right : Eye::Left;
    session.participant.vision_normal = true;
    session.participant.demographics["source"] = "simulated";

    SimulatedResponder responder(jitter_observer(model, options, derive_seed(subject_seed, 0xBEEF)),
                                 derive_seed(subject_seed, 0xCAFE));
    FixedRateClock clock(options.timing.refresh_hz);
    logs.push_back(run_session(plan, responder, clock, session));
  }
  return logs;
}

}  // namespace deadeye
