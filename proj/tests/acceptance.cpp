// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <httplib.h>
#include <sys/wait.h>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "deadeye/chart.hpp"
#include "deadeye/geometry.hpp"
#include "deadeye/observer.hpp"
#include "deadeye/protocol.hpp"
#include "deadeye/render.hpp"
#include "deadeye/report.hpp"
#include "deadeye/rng.hpp"
#include "deadeye/service.hpp"
#include "deadeye/stats.hpp"
#include "deadeye/stimgen.hpp"

using namespace deadeye;
using deadeye::io::Json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report_line(int n, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// --- 1 ----------------------------------------------------------------------

void stereo_pair_invariant() {
  const auto t0 = Clock::now();
  const ViewingGeometry geom;
  int checked = 0, violations = 0, present = 0;
  for (std::uint64_t seed = 1; checked < 1000; ++seed) {
    const TrialPlan plan = generate_plan(Experiment::Preattentive, seed);
    for (std::size_t i = 0; i < plan.size() && checked < 1000; ++i, ++checked) {
      const Stimulus s = instantiate_trial(plan, i);
      const StereoPair pair = render_pair(s, geom);
      const Disc* target = s.target();
      present += target != nullptr;
      PixelRect box{0, 0, 0, 0};
      if (target) box = disc_bbox(*target, geom);
      bool differs_inside = false, differs_outside = false;
      for (int y = 0; y < geom.res_h_px; ++y) {
        for (int x = 0; x < geom.res_w_px; ++x) {
          if (pair.left.at(x, y) == pair.right.at(x, y)) continue;
          const bool inside = x >= box.x0 && x < box.x1 && y >= box.y0 && y < box.y1;
          (inside ? differs_inside : differs_outside) = true;
        }
      }
      if (differs_outside || differs_inside != (target != nullptr)) ++violations;
    }
  }
  const double secs = seconds_since(t0);
  report_line(1, violations == 0 && secs < 60,
              fmt("%d stimuli (%d with target), %d violations, %.1f s", checked, present, violations, secs));
}

// --- 2 ----------------------------------------------------------------------

void balancing() {
  int bad_blocks = 0, blocks = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (Experiment e : {Experiment::Preattentive, Experiment::Conjunction}) {
      const TrialPlan plan = generate_plan(e, seed);
      for (const Block& b : plan.blocks) {
        ++blocks;
        int present = 0, absent = 0, left = 0, right = 0;
        int magenta = 0, yellow = 0, magenta_l = 0, magenta_r = 0, yellow_l = 0, yellow_r = 0;
        for (const PlannedTrial& t : b.trials) {
          const TrialCondition& c = t.condition;
          if (!c.target_present) {
            ++absent;
            continue;
          }
          ++present;
          const bool l = c.target_eye == Eye::Left;
          (l ? left : right)++;
          if (c.conjunction_target_kind == ConjunctionTarget::MagentaPopout) {
            ++magenta;
            (l ? magenta_l : magenta_r)++;
          } else if (c.conjunction_target_kind == ConjunctionTarget::YellowNonPopout) {
            ++yellow;
            (l ? yellow_l : yellow_r)++;
          }
        }
        bool ok = b.trials.size() == 48 && present == 24 && absent == 24 && left == 12 && right == 12;
        if (e == Experiment::Conjunction) {
          ok = ok && magenta == 12 && yellow == 12 && magenta_l == 6 && magenta_r == 6 && yellow_l == 6 &&
               yellow_r == 6;
        }
        bad_blocks += !ok;
      }
    }
  }
  report_line(2, bad_blocks == 0, fmt("%d blocks over 100 seeds x 2 experiments, %d unbalanced", blocks, bad_blocks));
}

// --- 3 ----------------------------------------------------------------------

void geometry() {
  const double disc = cm_to_deg(4.59, 280.0);
  const HalfAngles h = usable_half_angles(ViewingGeometry{}, DisplayLayout{});
  const bool ok = disc >= 0.935 && disc <= 0.945 && std::abs(h.horizontal_deg - 8.88) <= 0.01 &&
                  std::abs(h.vertical_deg - 5.22) <= 0.01;
  report_line(3, ok, fmt("disc %.4f deg, usable half-angles %.4f / %.4f deg", disc, h.horizontal_deg, h.vertical_deg));
}

// --- 4 ----------------------------------------------------------------------

void statistics_oracle() {
  Rng rng(4);
  double worst = 0.0, worst_identity = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.below(25), k = 2 + rng.below(4);
    stats::Matrix m(n, std::vector<double>(k));
    for (auto& row : m) {
      const double subject = rng.normal(0, 3);
      for (std::size_t j = 0; j < k; ++j) row[j] = subject + 0.4 * j + rng.normal(0, 1);
    }
    // Definitional oracle: residuals of the additive subject + condition model.
    std::vector<double> row_mean(n, 0), col_mean(k, 0);
    double grand = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        row_mean[i] += m[i][j] / k;
        col_mean[j] += m[i][j] / n;
        grand += m[i][j] / (n * k);
      }
    double ss_cond = 0, ss_err = 0;
    for (std::size_t j = 0; j < k; ++j) ss_cond += n * std::pow(col_mean[j] - grand, 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) ss_err += std::pow(m[i][j] - row_mean[i] - col_mean[j] + grand, 2);
    const double d1 = k - 1.0, d2 = (k - 1.0) * (n - 1.0);
    const double f = (ss_cond / d1) / (ss_err / d2);
    const double fp = boost::math::cdf(boost::math::complement(boost::math::fisher_f(d1, d2), f));
    const stats::AnovaResult a = stats::rm_anova(m);
    worst = std::max({worst, std::abs(a.f - f) / std::max(1.0, f), std::abs(a.p - fp) / std::max(1.0, fp)});

    std::vector<double> x(n), y(n);
    double dm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = m[i][0];
      y[i] = m[i][1];
      dm += (x[i] - y[i]) / n;
    }
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) var += std::pow(x[i] - y[i] - dm, 2) / (n - 1);
    const double t = dm / std::sqrt(var / n);
    const double tp = 2 * boost::math::cdf(boost::math::complement(boost::math::students_t(n - 1.0), std::abs(t)));
    const stats::TTestResult tt = stats::paired_ttest(x, y);
    worst = std::max({worst, std::abs(tt.t - t) / std::max(1.0, std::abs(t)), std::abs(tt.p - tp) / std::max(1.0, tp)});

    stats::Matrix two;
    for (std::size_t i = 0; i < n; ++i) two.push_back({x[i], y[i]});
    const double f2 = stats::rm_anova(two).f;
    worst_identity = std::max(worst_identity, std::abs(f2 - tt.t * tt.t) / std::max(1.0, f2));
  }
  report_line(4, worst <= 1e-6 && worst_identity <= 1e-6,
              fmt("100 matrices, max rel error %.2e, max |F - t^2| rel %.2e", worst, worst_identity));
}

// --- 5 and 6 ----------------------------------------------------------------

struct MetaRun {
  std::vector<double> accuracy;  // per set size
  std::vector<double> rt_s;
  double fn_share = NAN;
  double acc_anova_p = NAN;
  double rt_anova_p = NAN;
};

MetaRun analyse_run(const std::vector<SessionLog>& logs) {
  MetaRun out;
  for (const stats::AccuracyRow& r : stats::accuracy_by_setsize(logs).rows) out.accuracy.push_back(r.mean);
  for (const stats::RtRow& r : stats::rt_summary(logs)) out.rt_s.push_back(r.all_trials.mean / 1000.0);
  out.fn_share = stats::fn_fp_split(logs).fn_share;
  out.acc_anova_p = stats::rm_anova(stats::accuracy_matrix(logs).values).p;
  out.rt_anova_p = stats::rm_anova(stats::rt_matrix(logs).values).p;
  return out;
}

std::vector<double> column_mean(const std::vector<MetaRun>& runs, std::vector<double> MetaRun::*field) {
  std::vector<double> out((runs.front().*field).size(), 0.0);
  for (const MetaRun& r : runs)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (r.*field)[i] / runs.size();
  return out;
}

std::string list(const std::vector<double>& v, const char* f = "%.3f") {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : "/") + fmt(f, x);
  return out;
}

void preattentive_reproduction() {
  const auto t0 = Clock::now();
  const std::vector<double> reported{0.88, 0.88, 0.91, 0.89};
  std::vector<MetaRun> runs;
  for (std::uint64_t meta = 0; meta < 100; ++meta) {
    const TrialPlan plan = generate_plan(Experiment::Preattentive, derive_seed(500, meta));
    runs.push_back(analyse_run(simulate_cohort(PreattentiveObserver{}, plan, 21, derive_seed(501, meta))));
  }
  const double secs = seconds_since(t0);
  const std::vector<double> acc = column_mean(runs, &MetaRun::accuracy);
  bool acc_ok = acc.size() == 4;
  for (std::size_t i = 0; i < acc.size() && acc_ok; ++i) acc_ok = std::abs(acc[i] - reported[i]) <= 0.03;
  double fn = 0;
  int non_rejections = 0, runs_in_band = 0;
  for (const MetaRun& r : runs) {
    fn += r.fn_share / runs.size();
    non_rejections += r.acc_anova_p > 0.05;
    bool in = true;
    for (std::size_t i = 0; i < 4; ++i) in = in && std::abs(r.accuracy[i] - reported[i]) <= 0.03;
    runs_in_band += in;
  }
  const bool ok = acc_ok && std::abs(fn - 0.68) <= 0.05 && non_rejections >= 90 && secs < 120;
  report_line(5, ok,
              fmt("accuracy %s (target 0.88/0.88/0.91/0.89 +-0.03; single runs inside: %d/100), FN share %.3f, "
                  "ANOVA p>.05 in %d/100, %.1f s",
                  list(acc).c_str(), runs_in_band, fn, non_rejections, secs));
}

void conjunction_reproduction() {
  const std::vector<double> reported_rt{2.25, 2.63, 3.47};
  const std::vector<double> reported_acc{0.87, 0.81, 0.77};
  std::vector<MetaRun> runs;
  for (std::uint64_t meta = 0; meta < 100; ++meta) {
    const TrialPlan plan = generate_plan(Experiment::Conjunction, derive_seed(600, meta));
    runs.push_back(analyse_run(simulate_cohort(SerialObserver{}, plan, 21, derive_seed(601, meta))));
  }
  const std::vector<double> rt = column_mean(runs, &MetaRun::rt_s);
  const std::vector<double> acc = column_mean(runs, &MetaRun::accuracy);
  bool ok = rt.size() == 3 && acc.size() == 3;
  for (std::size_t i = 0; ok && i < 3; ++i) {
    ok = std::abs(rt[i] - reported_rt[i]) <= 0.3 && std::abs(acc[i] - reported_acc[i]) <= 0.05;
    if (i > 0) ok = ok && rt[i] > rt[i - 1] && acc[i] < acc[i - 1];
  }
  int rejections = 0;
  for (const MetaRun& r : runs) rejections += r.rt_anova_p < 0.01;
  ok = ok && rejections >= 95;
  report_line(6, ok,
              fmt("RT %s s (target 2.25/2.63/3.47 +-0.3), accuracy %s (target 0.87/0.81/0.77 +-0.05), "
                  "RT ANOVA p<.01 in %d/100",
                  list(rt, "%.2f").c_str(), list(acc).c_str(), rejections));
}

// --- 7 ----------------------------------------------------------------------

class NoisyResponder final : public Responder {
 public:
  explicit NoisyResponder(std::uint64_t seed) : rng_(seed) {}
  std::optional<ResponseDecision> respond(const Stimulus& s, std::size_t) override {
    return ResponseDecision{rng_.bernoulli(0.8) == s.condition.target_present, rng_.uniform(50, 1500)};
  }

 private:
  Rng rng_;
};

void protocol_timing() {
  int sessions = 0, trials = 0, bad_exposure = 0, bad_fixation = 0, replay_mismatch = 0, incomplete = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TrialPlan plan = generate_plan(Experiment::Preattentive, seed);
    NoisyResponder responder(seed);
    FixedRateClock clock(60.0, 1000.0 * seed);
    SessionOptions opts;
    opts.pause_ms = 250.0 * seed;
    std::vector<Event> events;
    std::vector<Effect> effects;
    // Frames per trial: a vsync shows the phase the tick leaves us in.
    std::map<std::size_t, int> fixation_frames, exposure_frames;
    const SessionLog log = run_session(plan, responder, clock, opts, [&](const Event& e, const Transition& t) {
      events.push_back(e);
      effects.insert(effects.end(), t.effects.begin(), t.effects.end());
      if (!std::holds_alternative<event::Tick>(e)) return;
      const PhaseKind k = kind_of(t.state.phase);
      if (k == PhaseKind::Fixation) ++fixation_frames[t.state.pending.trial_index];
      if (k == PhaseKind::Exposure) ++exposure_frames[t.state.pending.trial_index];
    });
    ++sessions;
    trials += static_cast<int>(log.trials.size());
    incomplete += !log.complete;
    for (const TrialRecord& r : log.trials) {
      bad_exposure += exposure_frames[r.trial_index] != 15;
      bad_fixation += fixation_frames[r.trial_index] != 150;
    }

    const ProtocolContext ctx = ProtocolContext::from_plan(plan, SessionMode::Recorded);
    Transition t = begin(ctx, time_of(events.front()));
    std::vector<Effect> replayed = t.effects;
    for (std::size_t i = 1; i < events.size(); ++i) {
      t = advance(ctx, t.state, events[i]);
      replayed.insert(replayed.end(), t.effects.begin(), t.effects.end());
    }
    std::vector<TrialRecord> records;
    for (const Effect& fx : replayed)
      if (const auto* r = std::get_if<effect::RecordTrial>(&fx)) records.push_back(r->record);
    if (replayed.size() != effects.size() || records != log.trials) ++replay_mismatch;
  }
  report_line(7, bad_exposure == 0 && bad_fixation == 0 && replay_mismatch == 0 && incomplete == 0,
              fmt("%d sessions, %d trials at 60 Hz: %d exposures != 15 frames, %d fixations != 150 frames, "
                  "%d replay mismatches, %d incomplete sessions",
                  sessions, trials, bad_exposure, bad_fixation, replay_mismatch, incomplete));
}

// --- 8 ----------------------------------------------------------------------

void chart_highlighting() {
  Rng rng(8);
  int charts = 0, visible_mismatch = 0, escaped = 0;
  for (; charts < 50; ++charts) {
    chart::ChartSpec spec;
    spec.width_px = 400 + static_cast<int>(rng.below(600));
    spec.height_px = 300 + static_cast<int>(rng.below(300));
    spec.stroke_px = 1 + static_cast<int>(rng.below(5));
    const int n = 2 + static_cast<int>(rng.below(5));
    for (int s = 0; s < n; ++s) {
      chart::Series series{"series" + std::to_string(s), {}};
      double y = rng.normal(0, 2);
      for (int i = 0; i < 40; ++i) series.points.push_back({i * 0.5, y += rng.normal(0, 1)});
      spec.series.push_back(series);
    }
    spec.highlight.insert("series" + std::to_string(rng.below(n)));
    spec.hidden_eye = rng.below(2) ? Eye::Left : Eye::Right;
    const StereoPair pair = chart::render_chart_pair(spec);
    const Raster& visible = spec.hidden_eye == Eye::Left ? pair.right : pair.left;
    chart::ChartSpec plain = spec;
    plain.highlight.clear();
    visible_mismatch += !(visible == chart::render_chart(plain));
    const std::vector<bool> mask = chart::stroke_mask(spec, *spec.highlight.begin());
    for (int y = 0; y < spec.height_px; ++y)
      for (int x = 0; x < spec.width_px; ++x)
        escaped += !(pair.left.at(x, y) == pair.right.at(x, y)) && !mask[static_cast<std::size_t>(y * spec.width_px + x)];
  }
  report_line(8, visible_mismatch == 0 && escaped == 0,
              fmt("%d charts: %d visible-eye mismatches, %d diff pixels outside the highlight mask", charts,
                  visible_mismatch, escaped));
}

// --- 9 ----------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DEADEYE_CLI) + " " + args + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void cross_path() {
  const fs::path dir = fs::temp_directory_path() / ("deadeye-acceptance-" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  int compared = 0, mismatches = 0, errors = 0;
  for (const char* experiment : {"preattentive", "conjunction"}) {
    const fs::path work = dir / experiment;
    const std::string observer = std::string(experiment) == "preattentive" ? "preattentive" : "serial";
    errors += run_cli(fmt("gen --experiment %s --seed 9 --out ", experiment) + q(work / "plan.json")) != 0;
    errors += run_cli("simulate --plan " + q(work / "plan.json") + " --observer " + observer +
                      " --subjects 21 --seed 3 --out " + q(work / "logs")) != 0;
    errors += run_cli("analyze --logs " + q(work / "logs") + " --out " + q(work / "report.json")) != 0;
    if (errors) break;

    const service::Bundle bundle =
        service::bundle_from_json(service::make_bundle(io::plan_from_json(io::read_json(work / "plan.json")), {}));
    service::SessionStore store(work / "data", bundle.plan);
    service::Server server(bundle, store);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.http().wait_until_ready();
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(60, 0);
    for (const SessionLog& log : io::read_log_dir(work / "logs")) {
      const auto created = client.Post("/api/session", Json{{"participant", io::to_json(log.participant)}}.dump(),
                                       "application/json");
      if (!created || created->status != 201) {
        ++errors;
        continue;
      }
      const std::string id = Json::parse(created->body)["session_id"];
      Json records = Json::array();
      for (const TrialRecord& r : log.trials) records.push_back(io::to_json(r));
      const auto posted = client.Post("/api/session/" + id + "/records", records.dump(), "application/json");
      errors += !posted || posted->status != 200;
    }
    const auto res = client.Get("/api/report");
    server.stop();
    thread.join();
    ++compared;
    mismatches += !res || res->body != io::read_text(work / "report.json");
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  report_line(9, compared == 2 && mismatches == 0 && errors == 0,
              fmt("%d experiments, %d report mismatches, %d pipeline errors", compared, mismatches, errors));
}

}  // namespace

int main() {
  const std::pair<int, void (*)()> criteria[] = {
      {1, stereo_pair_invariant}, {2, balancing},        {3, geometry},
      {4, statistics_oracle},     {5, preattentive_reproduction}, {6, conjunction_reproduction},
      {7, protocol_timing},       {8, chart_highlighting}, {9, cross_path}};
  for (const auto& [n, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      report_line(n, false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
