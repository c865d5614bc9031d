#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "deadeye/session.hpp"
#include "deadeye/stimgen.hpp"

namespace deadeye {

struct TimingConfig {
  double refresh_hz = 60.0;
  int fixation_ms = 2500;
  int feedback_ms = 500;

  double frame_ms() const noexcept { return 1000.0 / refresh_hz; }
  // Nearest whole number of frames, at least one.
  int frames(int ms) const noexcept;

  friend bool operator==(const TimingConfig&, const TimingConfig&) = default;
};

void validate(const TimingConfig& timing);

enum class Sound { Correct, Incorrect, Neutral };
const char* to_string(Sound sound) noexcept;

struct TrialSlot {
  TrialCondition condition;
  std::size_t block = 0;
  std::optional<GridCell> target_cell;
};

// Static inputs of the state machine.
struct ProtocolContext {
  std::vector<TrialSlot> trials;
  SessionMode mode = SessionMode::Recorded;
  TimingConfig timing;

  static ProtocolContext from_plan(const TrialPlan& plan, SessionMode mode, const TimingConfig& timing = {});
};

// Timed phases count display frames. A phase entered on a key press is
// "unlatched" until the next vsync tick, which becomes its first frame.
namespace phase {
struct Fixation {
  int frames_left = 0;
  bool latched = false;
};
struct Exposure {
  std::optional<int> frames_left;  // nullopt: open-ended
  bool latched = false;
};
struct AwaitResponse {};
struct Feedback {
  Sound sound = Sound::Neutral;
  int frames_left = 0;
  bool latched = false;
};
struct BlockBreak {};
struct Done {};
}  // namespace phase

using Phase = std::variant<phase::Fixation, phase::Exposure, phase::AwaitResponse,
                           phase::Feedback, phase::BlockBreak, phase::Done>;

PhaseKind kind_of(const Phase& p) noexcept;

struct ProtocolState {
  Phase phase = phase::Done{};
  std::size_t trial = 0;
  std::size_t completed = 0;
  double last_event_ms = 0.0;
  TrialRecord pending;
};

namespace event {
struct Tick {
  double now_ms = 0.0;
};
struct KeyYes {
  double now_ms = 0.0;
};
struct KeyNo {
  double now_ms = 0.0;
};
// Leave a block break.
struct Continue {
  double now_ms = 0.0;
};
// Operator ends the session (ends open-ended training).
struct Stop {
  double now_ms = 0.0;
};
}  // namespace event

using Event = std::variant<event::Tick, event::KeyYes, event::KeyNo, event::Continue, event::Stop>;

double time_of(const Event& e) noexcept;

namespace effect {
struct ShowCrosshair {};
struct ShowStimulus {
  std::size_t trial = 0;
};
struct ShowBlank {};
struct ShowPause {};
struct PlaySound {
  Sound sound = Sound::Neutral;
};
struct RecordTrial {
  TrialRecord record;
};
struct EnterPhase {
  PhaseKind phase = PhaseKind::Fixation;
  double at_ms = 0.0;
};
}  // namespace effect

using Effect = std::variant<effect::ShowCrosshair, effect::ShowStimulus, effect::ShowBlank,
                            effect::ShowPause, effect::PlaySound, effect::RecordTrial,
                            effect::EnterPhase>;

struct Transition {
  ProtocolState state;
  std::vector<Effect> effects;
};

// Enters the first fixation on a vsync tick at `now_ms`.
Transition begin(const ProtocolContext& ctx, double now_ms);

// Pure transition function. Throws deadeye::Error on a timestamp earlier than
// the previous event or when the session is already Done.
Transition advance(const ProtocolContext& ctx, ProtocolState state, const Event& e);

// --- session driver -------------------------------------------------------

struct ResponseDecision {
  bool yes = false;
  double rt_ms = 0.0;  // from stimulus onset
};

class Responder {
 public:
  virtual ~Responder() = default;
  // nullopt means the responder is exhausted.
  virtual std::optional<ResponseDecision> respond(const Stimulus& stimulus, std::size_t trial_index) = 0;
};

class TickSource {
 public:
  virtual ~TickSource() = default;
  // Next vsync timestamp; nullopt when the clock has run out.
  virtual std::optional<double> next() = 0;
};

class FixedRateClock final : public TickSource {
 public:
  explicit FixedRateClock(double hz, double start_ms = 0.0,
                          std::optional<std::uint64_t> max_ticks = std::nullopt)
      : hz_(hz), start_ms_(start_ms), max_ticks_(max_ticks) {}

  std::optional<double> next() override;

 private:
  double hz_;
  double start_ms_;
  std::optional<std::uint64_t> max_ticks_;
  std::uint64_t count_ = 0;
};

struct SessionOptions {
  SessionMode mode = SessionMode::Recorded;
  TimingConfig timing;
  Participant participant;
  double pause_ms = 0.0;  // time spent in each block break
  // Training sessions run until the operator stops them; the driver stops
  // after this many practice trials.
  std::size_t training_trials = 10;
};

// Observes every event fed to the state machine and the resulting transition.
using TransitionObserver = std::function<void(const Event&, const Transition&)>;

SessionLog run_session(const TrialPlan& plan, Responder& responder, TickSource& clock,
                       const SessionOptions& options = {}, const TransitionObserver& observer = {});

}  // namespace deadeye
