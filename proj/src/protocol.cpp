#include "deadeye/protocol.hpp"

#include <cmath>
#include <string>

#include "deadeye/error.hpp"

namespace deadeye {

int TimingConfig::frames(int ms) const noexcept {
  const long n = std::lround(ms * refresh_hz / 1000.0);
  return n < 1 ? 1 : static_cast<int>(n);
}

void validate(const TimingConfig& t) {
  if (!(t.refresh_hz > 0.0)) throw Error("timing: refresh rate must be positive");
  if (t.fixation_ms <= 0 || t.feedback_ms <= 0) throw Error("timing: durations must be positive");
}

const char* to_string(Sound sound) noexcept {
  switch (sound) {
    case Sound::Correct: return "correct";
    case Sound::Incorrect: return "incorrect";
    case Sound::Neutral: return "neutral";
  }
  return "?";
}

ProtocolContext ProtocolContext::from_plan(const TrialPlan& plan, SessionMode mode,
                                           const TimingConfig& timing) {
  validate(timing);
  ProtocolContext ctx;
  ctx.mode = mode;
  ctx.timing = timing;
  ctx.trials.reserve(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    TrialSlot slot;
    slot.condition = plan.at(i).condition;
    slot.block = plan.block_of(i);
    if (slot.condition.target_present) {
      const Stimulus s = instantiate_trial(plan, i);
      slot.target_cell = s.target()->cell;
    }
    ctx.trials.push_back(slot);
  }
  return ctx;
}

PhaseKind kind_of(const Phase& p) noexcept {
  return static_cast<PhaseKind>(p.index());
}

double time_of(const Event& e) noexcept {
  return std::visit([](const auto& ev) { return ev.now_ms; }, e);
}

namespace {

using Effects = std::vector<Effect>;

std::size_t slot_of(const ProtocolContext& ctx, std::size_t trial) {
  return trial % ctx.trials.size();
}

void log_phase(ProtocolState& s, PhaseKind kind, double now, Effects& fx) {
  if (kind != PhaseKind::BlockBreak && kind != PhaseKind::Done) {
    s.pending.phase_log.push_back({kind, now});
  }
  fx.push_back(effect::EnterPhase{kind, now});
}

void enter_fixation(const ProtocolContext& ctx, ProtocolState& s, double now, bool latched, Effects& fx) {
  // Stray keys pressed during a block break belong to the next trial.
  std::vector<double> carried;
  if (std::holds_alternative<phase::BlockBreak>(s.phase)) carried = std::move(s.pending.stray_inputs_ms);

  const TrialSlot& slot = ctx.trials[slot_of(ctx, s.trial)];
  s.pending = TrialRecord{};
  s.pending.trial_index = s.trial;
  s.pending.block = slot.block;
  s.pending.condition = slot.condition;
  s.pending.target_cell = slot.target_cell;
  s.pending.stray_inputs_ms = std::move(carried);
  s.phase = phase::Fixation{ctx.timing.frames(ctx.timing.fixation_ms), latched};
  log_phase(s, PhaseKind::Fixation, now, fx);
  fx.push_back(effect::ShowCrosshair{});
}

void enter_exposure(const ProtocolContext& ctx, ProtocolState& s, double now, Effects& fx) {
  const Exposure& exposure = s.pending.condition.exposure;
  phase::Exposure p;
  if (exposure.is_fixed()) p.frames_left = ctx.timing.frames(exposure.ms);
  p.latched = true;
  s.phase = p;
  s.pending.stimulus_onset_ms = now;
  log_phase(s, PhaseKind::Exposure, now, fx);
  fx.push_back(effect::ShowStimulus{slot_of(ctx, s.trial)});
}

void enter_feedback(const ProtocolContext& ctx, ProtocolState& s, double now, bool latched, Effects& fx) {
  Sound sound = Sound::Neutral;
  if (ctx.mode == SessionMode::Training) {
    sound = s.pending.correct.value_or(false) ? Sound::Correct : Sound::Incorrect;
  }
  s.phase = phase::Feedback{sound, ctx.timing.frames(ctx.timing.feedback_ms), latched};
  log_phase(s, PhaseKind::Feedback, now, fx);
  fx.push_back(effect::PlaySound{sound});
}

void enter_done(ProtocolState& s, double now, Effects& fx) {
  s.phase = phase::Done{};
  log_phase(s, PhaseKind::Done, now, fx);
}

void finish_trial(const ProtocolContext& ctx, ProtocolState& s, double now, Effects& fx) {
  fx.push_back(effect::RecordTrial{s.pending});
  ++s.completed;
  const std::size_t next = s.trial + 1;
  if (ctx.mode == SessionMode::Training) {
    s.trial = next;
    enter_fixation(ctx, s, now, true, fx);
    return;
  }
  if (next == ctx.trials.size()) {
    enter_done(s, now, fx);
    return;
  }
  const bool new_block = ctx.trials[next].block != ctx.trials[s.trial].block;
  s.trial = next;
  if (new_block) {
    s.pending.stray_inputs_ms.clear();
    s.phase = phase::BlockBreak{};
    log_phase(s, PhaseKind::BlockBreak, now, fx);
    fx.push_back(effect::ShowPause{});
  } else {
    enter_fixation(ctx, s, now, true, fx);
  }
}

void record_response(ProtocolState& s, bool yes, double now) {
  TrialRecord& r = s.pending;
  r.response = yes;
  r.correct = yes == r.condition.target_present;
  r.response_time_ms = now;
  r.reaction_ms = now - r.stimulus_onset_ms;
}

void on_tick(const ProtocolContext& ctx, ProtocolState& s, double now, Effects& fx) {
  if (auto* f = std::get_if<phase::Fixation>(&s.phase)) {
    if (!f->latched) {
      f->latched = true;
    } else if (--f->frames_left == 0) {
      enter_exposure(ctx, s, now, fx);
    }
  } else if (auto* x = std::get_if<phase::Exposure>(&s.phase)) {
    if (!x->frames_left) return;
    if (--*x->frames_left > 0) return;
    s.pending.stimulus_offset_ms = now;
    fx.push_back(effect::ShowBlank{});
    if (s.pending.response) {
      enter_feedback(ctx, s, now, true, fx);
    } else {
      s.phase = phase::AwaitResponse{};
      log_phase(s, PhaseKind::AwaitResponse, now, fx);
    }
  } else if (auto* b = std::get_if<phase::Feedback>(&s.phase)) {
    if (!b->latched) {
      b->latched = true;
    } else if (--b->frames_left == 0) {
      finish_trial(ctx, s, now, fx);
    }
  }
}

void on_key(const ProtocolContext& ctx, ProtocolState& s, bool yes, double now, Effects& fx) {
  if (auto* x = std::get_if<phase::Exposure>(&s.phase)) {
    if (s.pending.response) {
      s.pending.stray_inputs_ms.push_back(now);
      return;
    }
    record_response(s, yes, now);
    if (!x->frames_left) {
      s.pending.stimulus_offset_ms = now;
      fx.push_back(effect::ShowBlank{});
      enter_feedback(ctx, s, now, false, fx);
    }
    return;
  }
  if (std::holds_alternative<phase::AwaitResponse>(s.phase)) {
    record_response(s, yes, now);
    enter_feedback(ctx, s, now, false, fx);
    return;
  }
  s.pending.stray_inputs_ms.push_back(now);
}

}  // namespace

Transition begin(const ProtocolContext& ctx, double now_ms) {
  if (ctx.trials.empty()) throw Error("protocol: no trials");
  validate(ctx.timing);
  Transition t;
  t.state.last_event_ms = now_ms;
  enter_fixation(ctx, t.state, now_ms, true, t.effects);
  return t;
}

Transition advance(const ProtocolContext& ctx, ProtocolState state, const Event& e) {
  if (std::holds_alternative<phase::Done>(state.phase)) throw Error("protocol: session already done");
  const double now = time_of(e);
  if (now < state.last_event_ms) {
    throw Error("protocol: event at " + std::to_string(now) + " ms precedes previous event at " +
                std::to_string(state.last_event_ms) + " ms");
  }
  state.last_event_ms = now;
  Effects fx;
  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, event::Tick>) {
          on_tick(ctx, state, now, fx);
        } else if constexpr (std::is_same_v<T, event::KeyYes>) {
          on_key(ctx, state, true, now, fx);
        } else if constexpr (std::is_same_v<T, event::KeyNo>) {
          on_key(ctx, state, false, now, fx);
        } else if constexpr (std::is_same_v<T, event::Continue>) {
          if (std::holds_alternative<phase::BlockBreak>(state.phase)) {
            enter_fixation(ctx, state, now, false, fx);
          }
        } else {
          enter_done(state, now, fx);
        }
      },
      e);
  return {std::move(state), std::move(fx)};
}

std::optional<double> FixedRateClock::next() {
  if (max_ticks_ && count_ >= *max_ticks_) return std::nullopt;
  // Multiply rather than accumulate so timestamps do not drift.
  return start_ms_ + static_cast<double>(count_++) * 1000.0 / hz_;
}

SessionLog run_session(const TrialPlan& plan, Responder& responder, TickSource& clock,
                       const SessionOptions& options, const TransitionObserver& observer) {
  if (plan.size() == 0) throw Error("run_session: empty plan");
  const ProtocolContext ctx = ProtocolContext::from_plan(plan, options.mode, options.timing);

  SessionLog log;
  log.participant = options.participant;
  log.mode = options.mode;
  log.experiment = plan.experiment;
  log.plan_seed = plan.seed;
  log.plan_trials = plan.size();

  struct PendingKey {
    double at_ms;
    bool yes;
  };
  std::optional<PendingKey> key;
  std::optional<double> resume_at;
  std::optional<double> stop_at;
  bool exhausted = false;

  ProtocolState state;
  auto handle = [&](const std::vector<Effect>& effects, double now) {
    for (const Effect& fx : effects) {
      if (const auto* show = std::get_if<effect::ShowStimulus>(&fx)) {
        const Stimulus stimulus = instantiate_trial(plan, show->trial);
        const std::optional<ResponseDecision> d = responder.respond(stimulus, show->trial);
        if (!d) {
          exhausted = true;
          continue;
        }
        key = PendingKey{now + std::max(d->rt_ms, 0.0), d->yes};
      } else if (const auto* rec = std::get_if<effect::RecordTrial>(&fx)) {
        log.trials.push_back(rec->record);
        if (options.mode == SessionMode::Training && log.trials.size() >= options.training_trials) {
          stop_at = now;
        }
      } else if (std::holds_alternative<effect::ShowPause>(fx)) {
        resume_at = now + options.pause_ms;
      }
    }
  };
  auto apply = [&](const Event& e) {
    Transition t = advance(ctx, std::move(state), e);
    if (observer) observer(e, t);
    state = std::move(t.state);
    handle(t.effects, time_of(e));
  };

  const std::optional<double> first = clock.next();
  if (first) {
    Transition t = begin(ctx, *first);
    if (observer) observer(event::Tick{*first}, t);
    state = std::move(t.state);
    handle(t.effects, *first);
  }

  while (first && !exhausted && !std::holds_alternative<phase::Done>(state.phase)) {
    if (stop_at) {
      apply(event::Stop{*stop_at});
      break;
    }
    const std::optional<double> tick = clock.next();
    if (!tick) break;
    // Inputs that happened before this vsync are delivered first, in order.
    while (!std::holds_alternative<phase::Done>(state.phase)) {
      const bool key_due = key && key->at_ms <= *tick;
      const bool resume_due = resume_at && *resume_at <= *tick;
      if (!key_due && !resume_due) break;
      if (key_due && (!resume_due || key->at_ms <= *resume_at)) {
        const PendingKey k = *key;
        key.reset();
        if (k.yes) {
          apply(event::KeyYes{k.at_ms});
        } else {
          apply(event::KeyNo{k.at_ms});
        }
      } else {
        const double at = *resume_at;
        resume_at.reset();
        apply(event::Continue{at});
      }
    }
    if (exhausted || std::holds_alternative<phase::Done>(state.phase)) break;
    apply(event::Tick{*tick});
  }

  const bool done = std::holds_alternative<phase::Done>(state.phase);
  log.complete = options.mode == SessionMode::Recorded ? done && log.trials.size() == plan.size()
                                                      : done && !exhausted;
  return log;
}

}  // namespace deadeye
