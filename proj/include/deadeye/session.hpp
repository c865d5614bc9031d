#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deadeye/grid.hpp"
#include "deadeye/scene.hpp"

namespace deadeye {

enum class PhaseKind { Fixation, Exposure, AwaitResponse, Feedback, BlockBreak, Done };

struct PhaseEntry {
  PhaseKind phase = PhaseKind::Fixation;
  double at_ms = 0.0;

  friend bool operator==(const PhaseEntry&, const PhaseEntry&) = default;
};

struct TrialRecord {
  std::size_t trial_index = 0;
  std::size_t block = 0;
  TrialCondition condition;
  std::optional<GridCell> target_cell;
  std::optional<bool> response;
  std::optional<bool> correct;
  std::optional<double> reaction_ms;
  double stimulus_onset_ms = 0.0;
  std::optional<double> stimulus_offset_ms;
  std::optional<double> response_time_ms;
  std::vector<PhaseEntry> phase_log;
  std::vector<double> stray_inputs_ms;
  // Set by the presenting client, e.g. "exposure_out_of_tolerance" when the
  // measured exposure misses the nominal one by more than a frame.
  std::vector<std::string> flags;

  std::optional<double> exposure_ms() const {
    if (!stimulus_offset_ms) return std::nullopt;
    return *stimulus_offset_ms - stimulus_onset_ms;
  }

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

// Throws deadeye::Error when response/correctness/timing fields disagree.
void validate(const TrialRecord& record);

enum class TlxScale { Mental, Physical, Temporal, Performance, Effort, Frustration };
inline constexpr std::array<TlxScale, 6> kTlxScales{TlxScale::Mental,      TlxScale::Physical,
                                                    TlxScale::Temporal,    TlxScale::Performance,
                                                    TlxScale::Effort,      TlxScale::Frustration};
const char* to_string(TlxScale scale) noexcept;

// NASA-TLX raw scores (0..100 in steps of 5) plus the three 0..6 Likert
// items and the headache question.
struct QuestionnaireResponse {
  std::array<int, 6> nasa_tlx{};
  int clearness = 0;
  int decision_making = 0;
  int focus = 0;
  bool headache = false;

  int tlx(TlxScale s) const noexcept { return nasa_tlx[static_cast<std::size_t>(s)]; }

  friend bool operator==(const QuestionnaireResponse&, const QuestionnaireResponse&) = default;
};

void validate(const QuestionnaireResponse& q);

struct Participant {
  std::string id;
  int age = 0;
  Eye dominant_eye = Eye::Right;
  bool vision_normal = true;
  std::map<std::string, std::string> demographics;

  friend bool operator==(const Participant&, const Participant&) = default;
};

enum class SessionMode { Training, Recorded };

inline constexpr int kLogSchemaVersion = 1;

struct SessionLog {
  Participant participant;
  SessionMode mode = SessionMode::Recorded;
  Experiment experiment = Experiment::Preattentive;
  std::uint64_t plan_seed = 0;
  std::size_t plan_trials = 0;
  bool complete = false;
  std::vector<TrialRecord> trials;
  std::optional<QuestionnaireResponse> questionnaire;

  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

// Recorded logs must hold exactly plan_trials records when marked complete.
void validate(const SessionLog& log);

}  // namespace deadeye
