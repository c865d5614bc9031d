#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "deadeye/error.hpp"
#include "deadeye/observer.hpp"
#include "deadeye/protocol.hpp"
#include "support.hpp"

using namespace deadeye;

namespace {

constexpr double kFrame = 1000.0 / 60.0;

double phase_start(const TrialRecord& r, PhaseKind k) {
  for (const PhaseEntry& e : r.phase_log) {
    if (e.phase == k) return e.at_ms;
  }
  return NAN;
}

// Counts vsync ticks of a 60 Hz stream between two timestamps on the grid.
long frames_between(double a, double b) { return std::lround((b - a) / kFrame); }

}  // namespace

TEST_CASE("frame quantization") {
  TimingConfig t;
  CHECK(t.frames(250) == 15);
  CHECK(t.frames(2500) == 150);
  CHECK(t.frames(1) == 1);
  t.refresh_hz = 144;
  CHECK(t.frames(250) == 36);
  t.refresh_hz = 0;
  CHECK_THROWS_AS(validate(t), Error);
}

TEST_CASE("fixed exposures span 15 frames and fixations 150") {
  const TrialPlan plan = generate_plan(Experiment::Preattentive, 31);
  for (double rt : {120.0, 400.0, 3000.0}) {
    testing::OracleResponder responder(rt);
    const SessionLog log = testing::run_with(plan, responder);
    REQUIRE(log.complete);
    REQUIRE(log.trials.size() == plan.size());
    const std::vector<std::size_t> starts = plan.block_starts();
    for (const TrialRecord& r : log.trials) {
      REQUIRE(r.exposure_ms());
      CHECK(frames_between(r.stimulus_onset_ms, *r.stimulus_offset_ms) == 15);
      CHECK(std::abs(*r.exposure_ms() - 250.0) < 1e-6);
      const double fix = phase_start(r, PhaseKind::Fixation);
      const bool after_break = r.trial_index > 0 &&
                               std::find(starts.begin(), starts.end(), r.trial_index) != starts.end();
      if (after_break) {
        // Entered on Continue between vsyncs; the next vsync is its first frame.
        CHECK(r.stimulus_onset_ms - fix > 2500.0);
        CHECK(r.stimulus_onset_ms - fix <= 2500.0 + kFrame + 1e-6);
      } else {
        CHECK(frames_between(fix, r.stimulus_onset_ms) == 150);
        CHECK(std::abs(r.stimulus_onset_ms - fix - 2500.0) < 1e-6);
      }
      CHECK(r.correct == true);
      CHECK(*r.reaction_ms == doctest::Approx(rt));
      CHECK(r.stray_inputs_ms.empty());
    }
  }
}

TEST_CASE("keys outside exposure and response windows are stray") {
  const TrialPlan plan = generate_plan(Experiment::Preattentive, 2);
  const ProtocolContext ctx = ProtocolContext::from_plan(plan, SessionMode::Recorded);
  Transition t = begin(ctx, 0.0);
  t = advance(ctx, t.state, event::KeyYes{0.5});
  CHECK(kind_of(t.state.phase) == PhaseKind::Fixation);
  CHECK(t.state.pending.stray_inputs_ms == std::vector<double>{0.5});
  CHECK_FALSE(t.state.pending.response.has_value());

  // Drive to the stimulus.
  int tick = 1;
  while (kind_of(t.state.phase) == PhaseKind::Fixation) t = advance(ctx, t.state, event::Tick{tick++ * kFrame});
  REQUIRE(kind_of(t.state.phase) == PhaseKind::Exposure);
  const double onset = t.state.pending.stimulus_onset_ms;
  CHECK(onset == doctest::Approx(150 * kFrame));

  t = advance(ctx, t.state, event::KeyNo{onset + 1});
  t = advance(ctx, t.state, event::KeyYes{onset + 2});  // second key is stray
  CHECK(t.state.pending.response == false);
  CHECK(t.state.pending.stray_inputs_ms.size() == 2);
  // The fixed exposure keeps running after the response.
  CHECK(kind_of(t.state.phase) == PhaseKind::Exposure);
  while (kind_of(t.state.phase) == PhaseKind::Exposure) t = advance(ctx, t.state, event::Tick{tick++ * kFrame});
  CHECK(kind_of(t.state.phase) == PhaseKind::Feedback);
  CHECK(frames_between(onset, *t.state.pending.stimulus_offset_ms) == 15);

  t = advance(ctx, t.state, event::KeyYes{t.state.last_event_ms + 1});
  CHECK(t.state.pending.stray_inputs_ms.size() == 3);
  CHECK(t.state.pending.response == false);
}

TEST_CASE("feedback sounds: neutral when recorded, graded in training") {
  const TrialPlan plan = generate_plan(Experiment::Preattentive, 4);
  for (SessionMode mode : {SessionMode::Recorded, SessionMode::Training}) {
    testing::ConstantResponder always_yes(true, 300);
    FixedRateClock clock(60);
    SessionOptions opts;
    opts.mode = mode;
    opts.training_trials = 30;
    std::vector<Sound> sounds;
    std::vector<bool> present;
    const SessionLog log = run_session(plan, always_yes, clock, opts, [&](const Event&, const Transition& t) {
      for (const Effect& e : t.effects) {
        if (const auto* s = std::get_if<effect::PlaySound>(&e)) sounds.push_back(s->sound);
      }
    });
    for (const TrialRecord& r : log.trials) present.push_back(r.condition.target_present);
    REQUIRE(sounds.size() >= log.trials.size());
    for (std::size_t i = 0; i < log.trials.size(); ++i) {
      if (mode == SessionMode::Recorded) {
        CHECK(sounds[i] == Sound::Neutral);
      } else {
        CHECK(sounds[i] == (present[i] ? Sound::Correct : Sound::Incorrect));
      }
    }
    if (mode == SessionMode::Training) {
      CHECK(log.trials.size() == 30);
      CHECK(log.complete);
    }
  }
}

TEST_CASE("training wraps around the plan") {
  const TrialPlan plan = generate_plan(Experiment::Preattentive, 4);
  testing::OracleResponder responder(300);
  FixedRateClock clock(60);
  SessionOptions opts;
  opts.mode = SessionMode::Training;
  opts.training_trials = plan.size() + 5;
  const SessionLog log = run_session(plan, responder, clock, opts);
  REQUIRE(log.trials.size() == plan.size() + 5);
  CHECK(log.trials.back().trial_index == plan.size() + 4);
  CHECK(log.trials.back().condition == plan.at(4).condition);
}

TEST_CASE("until-response exposures end on the key") {
  const TrialPlan plan = generate_plan(Experiment::Conjunction, 4);
  testing::OracleResponder responder(2345.0);
  const SessionLog log = testing::run_with(plan, responder);
  REQUIRE(log.complete);
  for (const TrialRecord& r : log.trials) {
    CHECK(*r.exposure_ms() == doctest::Approx(2345.0));
    CHECK(r.response_time_ms == r.stimulus_offset_ms);
    for (const PhaseEntry& e : r.phase_log) CHECK(e.phase != PhaseKind::AwaitResponse);
  }
}

TEST_CASE("block breaks wait for Continue") {
  const TrialPlan plan = generate_plan(Experiment::Preattentive, 5);
  testing::OracleResponder responder(300);
  FixedRateClock clock(60);
  SessionOptions opts;
  opts.pause_ms = 10000;
  int breaks = 0;
  const SessionLog log = run_session(plan, responder, clock, opts, [&](const Event&, const Transition& t) {
    for (const Effect& e : t.effects) breaks += std::holds_alternative<effect::ShowPause>(e);
  });
  CHECK(breaks == 3);
  REQUIRE(log.complete);
  // Trial 48 opens a new block, so its fixation waits out the pause.
  const double fb47 = phase_start(log.trials[47], PhaseKind::Feedback);
  CHECK(phase_start(log.trials[48], PhaseKind::Fixation) - fb47 >= 10000 + 500 - 1e-6);
  const double fb46 = phase_start(log.trials[46], PhaseKind::Feedback);
  CHECK(phase_start(log.trials[47], PhaseKind::Fixation) - fb46 < 600);
  CHECK(log.trials[48].block == 1);
}

TEST_CASE("replaying the event log reproduces the session") {
  const TrialPlan plan = generate_plan(Experiment::Preattentive, 6);
  ObserverModel model = PreattentiveObserver{};
  SimulatedResponder responder(model, 99);
  FixedRateClock clock(60);
  std::vector<Event> events;
  std::vector<PhaseKind> phases;
  const SessionLog log = run_session(plan, responder, clock, {}, [&](const Event& e, const Transition& t) {
    events.push_back(e);
    for (const Effect& fx : t.effects) {
      if (const auto* p = std::get_if<effect::EnterPhase>(&fx)) phases.push_back(p->phase);
    }
  });
  REQUIRE(log.complete);

  const ProtocolContext ctx = ProtocolContext::from_plan(plan, SessionMode::Recorded);
  Transition t = begin(ctx, time_of(events.front()));
  std::vector<TrialRecord> records;
  std::vector<PhaseKind> replayed;
  auto collect = [&](const Transition& tr) {
    for (const Effect& fx : tr.effects) {
      if (const auto* r = std::get_if<effect::RecordTrial>(&fx)) records.push_back(r->record);
      if (const auto* p = std::get_if<effect::EnterPhase>(&fx)) replayed.push_back(p->phase);
    }
  };
  collect(t);
  for (std::size_t i = 1; i < events.size(); ++i) {
    t = advance(ctx, t.state, events[i]);
    collect(t);
  }
  CHECK(records == log.trials);
  CHECK(replayed == phases);
  CHECK(kind_of(t.state.phase) == PhaseKind::Done);
  CHECK_THROWS_AS(advance(ctx, t.state, event::Tick{1e12}), Error);
}

TEST_CASE("time never runs backwards") {
  const TrialPlan plan = generate_plan(Experiment::Preattentive, 2);
  const ProtocolContext ctx = ProtocolContext::from_plan(plan, SessionMode::Recorded);
  const Transition t = begin(ctx, 1000.0);
  CHECK_THROWS_AS(advance(ctx, t.state, event::Tick{999.0}), Error);
  CHECK_NOTHROW(advance(ctx, t.state, event::Tick{1000.0}));
}

TEST_CASE("exhausted inputs leave an incomplete log") {
  const TrialPlan plan = generate_plan(Experiment::Preattentive, 2);
  struct Limited final : Responder {
    int left = 10;
    std::optional<ResponseDecision> respond(const Stimulus& s, std::size_t) override {
      if (left-- == 0) return std::nullopt;
      return ResponseDecision{s.condition.target_present, 300};
    }
  } limited;
  FixedRateClock clock(60);
  const SessionLog a = run_session(plan, limited, clock);
  CHECK_FALSE(a.complete);
  CHECK(a.trials.size() == 10);

  testing::OracleResponder oracle;
  FixedRateClock short_clock(60, 0.0, 1000);
  const SessionLog b = run_session(plan, oracle, short_clock);
  CHECK_FALSE(b.complete);
  CHECK(b.trials.size() < plan.size());
}
