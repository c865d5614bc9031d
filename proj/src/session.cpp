#include "deadeye/session.hpp"

#include <cmath>
#include <string>

#include "deadeye/error.hpp"

namespace deadeye {

const char* to_string(TlxScale scale) noexcept {
  switch (scale) {
    case TlxScale::Mental: return "mental";
    case TlxScale::Physical: return "physical";
    case TlxScale::Temporal: return "temporal";
    case TlxScale::Performance: return "performance";
    case TlxScale::Effort: return "effort";
    case TlxScale::Frustration: return "frustration";
  }
  return "?";
}

void validate(const TrialRecord& r) {
  const std::string where = "trial " + std::to_string(r.trial_index) + ": ";
  if (r.response.has_value() != r.reaction_ms.has_value() ||
      r.response.has_value() != r.correct.has_value() ||
      r.response.has_value() != r.response_time_ms.has_value()) {
    throw Error(where + "response, correct, rt and response time must be present together");
  }
  if (r.response) {
    if (*r.correct != (*r.response == r.condition.target_present)) {
      throw Error(where + "correct flag disagrees with the response");
    }
    if (*r.reaction_ms < 0.0) throw Error(where + "negative reaction time");
    if (std::abs(*r.response_time_ms - r.stimulus_onset_ms - *r.reaction_ms) > 1e-6) {
      throw Error(where + "reaction time is not response time minus onset");
    }
  }
  if (r.stimulus_offset_ms && *r.stimulus_offset_ms < r.stimulus_onset_ms) {
    throw Error(where + "stimulus offset precedes onset");
  }
  for (std::size_t i = 1; i < r.phase_log.size(); ++i) {
    if (r.phase_log[i].at_ms < r.phase_log[i - 1].at_ms) throw Error(where + "phase log out of order");
  }
}

void validate(const QuestionnaireResponse& q) {
  for (TlxScale s : kTlxScales) {
    const int v = q.tlx(s);
    if (v < 0 || v > 100 || v % 5 != 0) {
      throw Error(std::string("questionnaire: TLX ") + to_string(s) + " must be a multiple of 5 in [0,100]");
    }
  }
  for (int v : {q.clearness, q.decision_making, q.focus}) {
    if (v < 0 || v > 6) throw Error("questionnaire: Likert answers must lie in [0,6]");
  }
}

void validate(const SessionLog& log) {
  for (const TrialRecord& r : log.trials) validate(r);
  for (std::size_t i = 1; i < log.trials.size(); ++i) {
    if (log.trials[i].trial_index <= log.trials[i - 1].trial_index) {
      throw Error("session log: trial indices must increase");
    }
  }
  if (log.mode == SessionMode::Recorded && log.complete && log.trials.size() != log.plan_trials) {
    throw Error("session log: complete recorded session must hold " + std::to_string(log.plan_trials) +
                " trials");
  }
  if (log.questionnaire) validate(*log.questionnaire);
}

}  // namespace deadeye
