#include "deadeye/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "deadeye/error.hpp"

namespace deadeye::io {

namespace {

std::string sub(const std::string& path, std::string_view key) { return path + "." + std::string(key); }
std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  return j;
}

const Json& require_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

bool present(const Json& j, std::string_view key) {
  auto it = j.find(key);
  return it != j.end() && !it->is_null();
}

const Json& field(const Json& j, std::string_view key, const std::string& path) {
  require_object(j, path);
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(sub(path, key), "missing field");
  return *it;
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<int>();
}

bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw SchemaError(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

double get_double(const Json& j, std::string_view key, const std::string& path) {
  return as_double(field(j, key, path), sub(path, key));
}
int get_int(const Json& j, std::string_view key, const std::string& path) {
  return as_int(field(j, key, path), sub(path, key));
}
bool get_bool(const Json& j, std::string_view key, const std::string& path) {
  return as_bool(field(j, key, path), sub(path, key));
}
std::string get_string(const Json& j, std::string_view key, const std::string& path) {
  return as_string(field(j, key, path), sub(path, key));
}

std::optional<double> opt_double(const Json& j, std::string_view key, const std::string& path) {
  if (!present(j, key)) return std::nullopt;
  return as_double(j.at(key), sub(path, key));
}
std::optional<bool> opt_bool(const Json& j, std::string_view key, const std::string& path) {
  if (!present(j, key)) return std::nullopt;
  return as_bool(j.at(key), sub(path, key));
}

// Seeds are written as decimal strings so JavaScript clients keep all 64 bits.
std::string seed_string(std::uint64_t seed) { return std::to_string(seed); }

std::uint64_t get_seed(const Json& j, std::string_view key, const std::string& path) {
  const Json& v = field(j, key, path);
  const std::string p = sub(path, key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return out;
  }
  throw SchemaError(p, "expected an unsigned 64-bit seed");
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json phase_log_json(const std::vector<PhaseEntry>& log) {
  Json out = Json::array();
  for (const PhaseEntry& e : log) out.push_back(Json{{"phase", to_string(e.phase)}, {"at_ms", e.at_ms}});
  return out;
}

PhaseKind phase_from_string(std::string_view s, const std::string& path) {
  for (PhaseKind k : {PhaseKind::Fixation, PhaseKind::Exposure, PhaseKind::AwaitResponse, PhaseKind::Feedback,
                      PhaseKind::BlockBreak, PhaseKind::Done}) {
    if (s == to_string(k)) return k;
  }
  throw SchemaError(path, "unknown phase '" + std::string(s) + "'");
}

ConjunctionTarget kind_from_string(std::string_view s, const std::string& path) {
  if (s == "magenta_popout") return ConjunctionTarget::MagentaPopout;
  if (s == "yellow_non_popout") return ConjunctionTarget::YellowNonPopout;
  throw SchemaError(path, "unknown target kind '" + std::string(s) + "'");
}

SessionMode mode_from_string(std::string_view s, const std::string& path) {
  if (s == "training") return SessionMode::Training;
  if (s == "recorded") return SessionMode::Recorded;
  throw SchemaError(path, "unknown session mode '" + std::string(s) + "'");
}

template <typename Fn>
void check_domain(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

}  // namespace

const char* to_string(Eye e) noexcept { return e == Eye::Left ? "left" : "right"; }
const char* to_string(Experiment e) noexcept {
  return e == Experiment::Preattentive ? "preattentive" : "conjunction";
}
const char* to_string(ConjunctionTarget k) noexcept {
  return k == ConjunctionTarget::MagentaPopout ? "magenta_popout" : "yellow_non_popout";
}
const char* to_string(SessionMode m) noexcept { return m == SessionMode::Training ? "training" : "recorded"; }
const char* to_string(PhaseKind p) noexcept {
  switch (p) {
    case PhaseKind::Fixation: return "fixation";
    case PhaseKind::Exposure: return "exposure";
    case PhaseKind::AwaitResponse: return "await_response";
    case PhaseKind::Feedback: return "feedback";
    case PhaseKind::BlockBreak: return "block_break";
    case PhaseKind::Done: return "done";
  }
  return "?";
}

Eye eye_from_string(std::string_view s, const std::string& path) {
  if (s == "left") return Eye::Left;
  if (s == "right") return Eye::Right;
  throw SchemaError(path, "expected 'left' or 'right', got '" + std::string(s) + "'");
}

Experiment experiment_from_string(std::string_view s, const std::string& path) {
  if (s == "preattentive") return Experiment::Preattentive;
  if (s == "conjunction") return Experiment::Conjunction;
  throw SchemaError(path, "expected 'preattentive' or 'conjunction', got '" + std::string(s) + "'");
}

CompositeMode composite_mode_from_string(std::string_view s, const std::string& path) {
  if (s == "anaglyph") return CompositeMode::Anaglyph;
  if (s == "sbs" || s == "side-by-side") return CompositeMode::SideBySide;
  if (s == "per-eye") return CompositeMode::PerEyeFiles;
  throw SchemaError(path, "expected 'anaglyph', 'sbs' or 'per-eye', got '" + std::string(s) + "'");
}

// --- scene ---------------------------------------------------------------

Json to_json(const ColorRgb& c) { return Json::array({c.r, c.g, c.b}); }

ColorRgb color_from_json(const Json& j, const std::string& path) {
  require_array(j, path);
  if (j.size() != 3) throw SchemaError(path, "expected [r, g, b]");
  std::array<std::uint8_t, 3> ch{};
  for (std::size_t i = 0; i < 3; ++i) {
    const int v = as_int(j[i], idx(path, i));
    if (v < 0 || v > 255) throw SchemaError(idx(path, i), "channel outside [0,255]");
    ch[i] = static_cast<std::uint8_t>(v);
  }
  return {ch[0], ch[1], ch[2]};
}

Json to_json(const GridSpec& g) {
  return Json{{"rows", g.rows},
              {"cols", g.cols},
              {"cell_w_deg", g.cell_w_deg},
              {"cell_h_deg", g.cell_h_deg},
              {"margin_h_deg", g.margin_h_deg},
              {"margin_v_deg", g.margin_v_deg},
              {"jitter_max_deg", g.jitter_max_deg},
              {"disc_radius_deg", g.disc_radius_deg}};
}

GridSpec grid_from_json(const Json& j, const std::string& path) {
  GridSpec g;
  g.rows = get_int(j, "rows", path);
  g.cols = get_int(j, "cols", path);
  g.cell_w_deg = get_double(j, "cell_w_deg", path);
  g.cell_h_deg = get_double(j, "cell_h_deg", path);
  g.margin_h_deg = get_double(j, "margin_h_deg", path);
  g.margin_v_deg = get_double(j, "margin_v_deg", path);
  g.jitter_max_deg = get_double(j, "jitter_max_deg", path);
  g.disc_radius_deg = get_double(j, "disc_radius_deg", path);
  check_domain(path, [&] { validate(g); });
  return g;
}

Json to_json(const Palette& p) {
  return Json{{"background", to_json(p.background)},
              {"distractor", to_json(p.distractor)},
              {"magenta", to_json(p.magenta)},
              {"crosshair", to_json(p.crosshair)}};
}

Palette palette_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  Palette p;
  if (present(j, "background")) p.background = color_from_json(j.at("background"), sub(path, "background"));
  if (present(j, "distractor")) p.distractor = color_from_json(j.at("distractor"), sub(path, "distractor"));
  if (present(j, "magenta")) p.magenta = color_from_json(j.at("magenta"), sub(path, "magenta"));
  if (present(j, "crosshair")) p.crosshair = color_from_json(j.at("crosshair"), sub(path, "crosshair"));
  return p;
}

Json to_json(const TrialCondition& c) {
  Json exposure = c.exposure.is_fixed() ? Json{{"kind", "fixed"}, {"ms", c.exposure.ms}}
                                        : Json{{"kind", "until_response"}};
  return Json{{"set_size", c.set_size},
              {"target_present", c.target_present},
              {"target_eye", c.target_eye ? Json(to_string(*c.target_eye)) : Json(nullptr)},
              {"experiment", to_string(c.experiment)},
              {"conjunction_target_kind",
               c.conjunction_target_kind ? Json(to_string(*c.conjunction_target_kind)) : Json(nullptr)},
              {"exposure", exposure}};
}

TrialCondition condition_from_json(const Json& j, const std::string& path) {
  TrialCondition c;
  c.set_size = get_int(j, "set_size", path);
  c.target_present = get_bool(j, "target_present", path);
  if (present(j, "target_eye")) {
    c.target_eye = eye_from_string(get_string(j, "target_eye", path), sub(path, "target_eye"));
  }
  c.experiment = experiment_from_string(get_string(j, "experiment", path), sub(path, "experiment"));
  if (present(j, "conjunction_target_kind")) {
    c.conjunction_target_kind =
        kind_from_string(get_string(j, "conjunction_target_kind", path), sub(path, "conjunction_target_kind"));
  }
  const std::string ep = sub(path, "exposure");
  const Json& e = field(j, "exposure", path);
  const std::string kind = get_string(e, "kind", ep);
  if (kind == "fixed") {
    c.exposure = Exposure::fixed(get_int(e, "ms", ep));
  } else if (kind == "until_response") {
    c.exposure = Exposure::until_response();
  } else {
    throw SchemaError(sub(ep, "kind"), "expected 'fixed' or 'until_response'");
  }
  check_domain(path, [&] { validate(c); });
  return c;
}

Json to_json(const Stimulus& s) {
  Json discs = Json::array();
  for (const Disc& d : s.discs) {
    discs.push_back(Json{{"id", d.id},
                         {"x_deg", d.center.x},
                         {"y_deg", d.center.y},
                         {"radius_deg", d.radius_deg},
                         {"color", to_json(d.color)},
                         {"visible_left", d.visible_left},
                         {"visible_right", d.visible_right},
                         {"row", d.cell.row},
                         {"col", d.cell.col}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"background", to_json(s.background)},
              {"grid", to_json(s.grid)},
              {"condition", to_json(s.condition)},
              {"target_id", opt(s.target_id)},
              {"discs", discs}};
}

Stimulus stimulus_from_json(const Json& j, const std::string& path) {
  const int version = get_int(j, "schema_version", path);
  if (version != kSchemaVersion) throw SchemaError(sub(path, "schema_version"), "unsupported version");
  Stimulus s;
  s.background = color_from_json(field(j, "background", path), sub(path, "background"));
  s.grid = grid_from_json(field(j, "grid", path), sub(path, "grid"));
  s.condition = condition_from_json(field(j, "condition", path), sub(path, "condition"));
  if (present(j, "target_id")) s.target_id = get_int(j, "target_id", path);
  const std::string dp = sub(path, "discs");
  const Json& discs = require_array(field(j, "discs", path), dp);
  for (std::size_t i = 0; i < discs.size(); ++i) {
    const std::string p = idx(dp, i);
    const Json& dj = discs[i];
    Disc d;
    d.id = get_int(dj, "id", p);
    d.center = {get_double(dj, "x_deg", p), get_double(dj, "y_deg", p)};
    d.radius_deg = get_double(dj, "radius_deg", p);
    d.color = color_from_json(field(dj, "color", p), sub(p, "color"));
    d.visible_left = get_bool(dj, "visible_left", p);
    d.visible_right = get_bool(dj, "visible_right", p);
    d.cell = {get_int(dj, "row", p), get_int(dj, "col", p)};
    s.discs.push_back(d);
  }
  check_domain(path, [&] { validate(s); });
  return s;
}

// --- plan ----------------------------------------------------------------

Json to_json(const TrialPlan& p) {
  Json blocks = Json::array();
  for (const Block& b : p.blocks) {
    Json trials = Json::array();
    for (const PlannedTrial& t : b.trials) {
      trials.push_back(Json{{"condition", to_json(t.condition)}, {"layout_seed", seed_string(t.layout_seed)}});
    }
    blocks.push_back(Json{{"set_size", b.set_size}, {"trials", trials}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "deadeye.plan"},
              {"experiment", to_string(p.experiment)},
              {"seed", seed_string(p.seed)},
              {"grid", to_json(p.grid)},
              {"palette", to_json(p.palette)},
              {"blocks", blocks}};
}

TrialPlan plan_from_json(const Json& j, const std::string& path) {
  const int version = get_int(j, "schema_version", path);
  if (version != kSchemaVersion) throw SchemaError(sub(path, "schema_version"), "unsupported version");
  if (get_string(j, "kind", path) != "deadeye.plan") throw SchemaError(sub(path, "kind"), "not a trial plan");
  TrialPlan p;
  p.experiment = experiment_from_string(get_string(j, "experiment", path), sub(path, "experiment"));
  p.seed = get_seed(j, "seed", path);
  p.grid = grid_from_json(field(j, "grid", path), sub(path, "grid"));
  p.palette = palette_from_json(field(j, "palette", path), sub(path, "palette"));
  const std::string bp = sub(path, "blocks");
  const Json& blocks = require_array(field(j, "blocks", path), bp);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string p_b = idx(bp, b);
    Block block;
    block.set_size = get_int(blocks[b], "set_size", p_b);
    const std::string tp = sub(p_b, "trials");
    const Json& trials = require_array(field(blocks[b], "trials", p_b), tp);
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const std::string p_t = idx(tp, t);
      PlannedTrial trial;
      trial.condition = condition_from_json(field(trials[t], "condition", p_t), sub(p_t, "condition"));
      trial.layout_seed = get_seed(trials[t], "layout_seed", p_t);
      block.trials.push_back(trial);
    }
    p.blocks.push_back(std::move(block));
  }
  check_domain(path, [&] { validate(p); });
  return p;
}

// --- configuration -------------------------------------------------------

Json to_json(const ViewingGeometry& g) {
  return Json{{"screen_w_cm", g.screen_w_cm},
              {"screen_h_cm", g.screen_h_cm},
              {"res_w_px", g.res_w_px},
              {"res_h_px", g.res_h_px},
              {"distance_cm", g.distance_cm}};
}

ViewingGeometry geometry_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  ViewingGeometry g;
  if (present(j, "screen_w_cm")) g.screen_w_cm = get_double(j, "screen_w_cm", path);
  if (present(j, "screen_h_cm")) g.screen_h_cm = get_double(j, "screen_h_cm", path);
  if (present(j, "res_w_px")) g.res_w_px = get_int(j, "res_w_px", path);
  if (present(j, "res_h_px")) g.res_h_px = get_int(j, "res_h_px", path);
  if (present(j, "distance_cm")) g.distance_cm = get_double(j, "distance_cm", path);
  check_domain(path, [&] { validate(g); });
  return g;
}

Json to_json(const DisplayLayout& l) {
  return Json{{"margin_h_cm", l.margin_h_cm},
              {"margin_v_cm", l.margin_v_cm},
              {"disc_size_cm", l.disc_size_cm},
              {"jitter_deg", l.jitter_deg}};
}

DisplayLayout layout_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  DisplayLayout l;
  if (present(j, "margin_h_cm")) l.margin_h_cm = get_double(j, "margin_h_cm", path);
  if (present(j, "margin_v_cm")) l.margin_v_cm = get_double(j, "margin_v_cm", path);
  if (present(j, "disc_size_cm")) l.disc_size_cm = get_double(j, "disc_size_cm", path);
  if (present(j, "jitter_deg")) l.jitter_deg = get_double(j, "jitter_deg", path);
  return l;
}

Json to_json(const TimingConfig& t) {
  return Json{{"refresh_hz", t.refresh_hz}, {"fixation_ms", t.fixation_ms}, {"feedback_ms", t.feedback_ms}};
}

TimingConfig timing_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  TimingConfig t;
  if (present(j, "refresh_hz")) t.refresh_hz = get_double(j, "refresh_hz", path);
  if (present(j, "fixation_ms")) t.fixation_ms = get_int(j, "fixation_ms", path);
  if (present(j, "feedback_ms")) t.feedback_ms = get_int(j, "feedback_ms", path);
  check_domain(path, [&] { validate(t); });
  return t;
}

Config config_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  Config c;
  if (present(j, "geometry")) c.geometry = geometry_from_json(j.at("geometry"), sub(path, "geometry"));
  if (present(j, "layout")) c.layout = layout_from_json(j.at("layout"), sub(path, "layout"));
  if (present(j, "timing")) c.timing = timing_from_json(j.at("timing"), sub(path, "timing"));
  if (present(j, "palette")) c.palette = palette_from_json(j.at("palette"), sub(path, "palette"));
  if (present(j, "crosshair")) {
    const std::string cp = sub(path, "crosshair");
    const Json& cj = require_object(j.at("crosshair"), cp);
    if (present(cj, "arm_px")) c.crosshair.arm_px = get_int(cj, "arm_px", cp);
    if (present(cj, "thickness_px")) c.crosshair.thickness_px = get_int(cj, "thickness_px", cp);
  }
  return c;
}

Json to_json(const Config& c) {
  return Json{{"geometry", to_json(c.geometry)},
              {"layout", to_json(c.layout)},
              {"timing", to_json(c.timing)},
              {"palette", to_json(c.palette)},
              {"crosshair", Json{{"arm_px", c.crosshair.arm_px}, {"thickness_px", c.crosshair.thickness_px}}}};
}

// --- sessions ------------------------------------------------------------

Json to_json(const Participant& p) {
  Json demographics = Json::object();
  for (const auto& [k, v] : p.demographics) demographics[k] = v;
  return Json{{"id", p.id},
              {"age", p.age},
              {"dominant_eye", to_string(p.dominant_eye)},
              {"vision_normal", p.vision_normal},
              {"demographics", demographics}};
}

Participant participant_from_json(const Json& j, const std::string& path) {
  Participant p;
  p.id = get_string(j, "id", path);
  if (present(j, "age")) p.age = get_int(j, "age", path);
  p.dominant_eye = eye_from_string(get_string(j, "dominant_eye", path), sub(path, "dominant_eye"));
  if (present(j, "vision_normal")) p.vision_normal = get_bool(j, "vision_normal", path);
  if (present(j, "demographics")) {
    const std::string dp = sub(path, "demographics");
    const Json& d = require_object(j.at("demographics"), dp);
    for (auto it = d.begin(); it != d.end(); ++it) p.demographics[it.key()] = as_string(it.value(), sub(dp, it.key()));
  }
  return p;
}

Json to_json(const QuestionnaireResponse& q) {
  Json tlx = Json::object();
  for (TlxScale s : kTlxScales) tlx[to_string(s)] = q.tlx(s);
  return Json{{"nasa_tlx", tlx},
              {"clearness", q.clearness},
              {"decision_making", q.decision_making},
              {"focus", q.focus},
              {"headache", q.headache}};
}

QuestionnaireResponse questionnaire_from_json(const Json& j, const std::string& path) {
  QuestionnaireResponse q;
  const std::string tp = sub(path, "nasa_tlx");
  const Json& tlx = field(j, "nasa_tlx", path);
  for (std::size_t i = 0; i < kTlxScales.size(); ++i) q.nasa_tlx[i] = get_int(tlx, to_string(kTlxScales[i]), tp);
  q.clearness = get_int(j, "clearness", path);
  q.decision_making = get_int(j, "decision_making", path);
  q.focus = get_int(j, "focus", path);
  q.headache = get_bool(j, "headache", path);
  check_domain(path, [&] { validate(q); });
  return q;
}

Json to_json(const TrialRecord& r) {
  Json cell = r.target_cell ? Json{{"row", r.target_cell->row}, {"col", r.target_cell->col}} : Json(nullptr);
  return Json{{"trial_index", r.trial_index},
              {"block", r.block},
              {"condition", to_json(r.condition)},
              {"target_cell", cell},
              {"response", opt(r.response)},
              {"correct", opt(r.correct)},
              {"reaction_ms", opt(r.reaction_ms)},
              {"stimulus_onset_ms", r.stimulus_onset_ms},
              {"stimulus_offset_ms", opt(r.stimulus_offset_ms)},
              {"response_time_ms", opt(r.response_time_ms)},
              {"phase_log", phase_log_json(r.phase_log)},
              {"stray_inputs_ms", r.stray_inputs_ms},
              {"flags", r.flags}};
}

TrialRecord record_from_json(const Json& j, const std::string& path) {
  TrialRecord r;
  const int index = get_int(j, "trial_index", path);
  if (index < 0) throw SchemaError(sub(path, "trial_index"), "must be non-negative");
  r.trial_index = static_cast<std::size_t>(index);
  const int block = get_int(j, "block", path);
  if (block < 0) throw SchemaError(sub(path, "block"), "must be non-negative");
  r.block = static_cast<std::size_t>(block);
  r.condition = condition_from_json(field(j, "condition", path), sub(path, "condition"));
  if (present(j, "target_cell")) {
    const std::string cp = sub(path, "target_cell");
    r.target_cell = GridCell{get_int(j.at("target_cell"), "row", cp), get_int(j.at("target_cell"), "col", cp)};
  }
  r.response = opt_bool(j, "response", path);
  r.correct = opt_bool(j, "correct", path);
  r.reaction_ms = opt_double(j, "reaction_ms", path);
  r.stimulus_onset_ms = get_double(j, "stimulus_onset_ms", path);
  r.stimulus_offset_ms = opt_double(j, "stimulus_offset_ms", path);
  r.response_time_ms = opt_double(j, "response_time_ms", path);
  if (present(j, "phase_log")) {
    const std::string lp = sub(path, "phase_log");
    const Json& log = require_array(j.at("phase_log"), lp);
    for (std::size_t i = 0; i < log.size(); ++i) {
      const std::string ep = idx(lp, i);
      r.phase_log.push_back({phase_from_string(get_string(log[i], "phase", ep), sub(ep, "phase")),
                             get_double(log[i], "at_ms", ep)});
    }
  }
  if (present(j, "stray_inputs_ms")) {
    const std::string sp = sub(path, "stray_inputs_ms");
    const Json& stray = require_array(j.at("stray_inputs_ms"), sp);
    for (std::size_t i = 0; i < stray.size(); ++i) r.stray_inputs_ms.push_back(as_double(stray[i], idx(sp, i)));
  }
  if (present(j, "flags")) {
    const std::string fp = sub(path, "flags");
    const Json& flags = require_array(j.at("flags"), fp);
    for (std::size_t i = 0; i < flags.size(); ++i) r.flags.push_back(as_string(flags[i], idx(fp, i)));
  }
  check_domain(path, [&] { validate(r); });
  return r;
}

Json to_json(const ObserverModel& m) {
  return std::visit(
      [](const auto& o) -> Json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, PreattentiveObserver>) {
          return Json{{"type", "preattentive"},
                      {"hit_rate", o.hit_rate},
                      {"correct_rejection_rate", o.correct_rejection_rate},
                      {"rt_mean_ms", o.rt_mean_ms},
                      {"rt_sd_ms", o.rt_sd_ms},
                      {"eccentricity_hit_slope", o.eccentricity_hit_slope}};
        } else {
          return Json{{"type", "serial"},
                      {"base_ms", o.base_ms},
                      {"per_item_ms", o.per_item_ms},
                      {"item_detect_prob", o.item_detect_prob},
                      {"lapse_per_item", o.lapse_per_item},
                      {"motor_sd_ms", o.motor_sd_ms}};
        }
      },
      m);
}

ObserverModel observer_from_json(const Json& j, const std::string& path) {
  const std::string type = get_string(j, "type", path);
  ObserverModel model;
  if (type == "preattentive") {
    PreattentiveObserver o;
    if (present(j, "hit_rate")) o.hit_rate = get_double(j, "hit_rate", path);
    if (present(j, "correct_rejection_rate")) o.correct_rejection_rate = get_double(j, "correct_rejection_rate", path);
    if (present(j, "rt_mean_ms")) o.rt_mean_ms = get_double(j, "rt_mean_ms", path);
    if (present(j, "rt_sd_ms")) o.rt_sd_ms = get_double(j, "rt_sd_ms", path);
    if (present(j, "eccentricity_hit_slope")) o.eccentricity_hit_slope = get_double(j, "eccentricity_hit_slope", path);
    model = o;
  } else if (type == "serial") {
    SerialObserver o;
    if (present(j, "base_ms")) o.base_ms = get_double(j, "base_ms", path);
    if (present(j, "per_item_ms")) o.per_item_ms = get_double(j, "per_item_ms", path);
    if (present(j, "item_detect_prob")) o.item_detect_prob = get_double(j, "item_detect_prob", path);
    if (present(j, "lapse_per_item")) o.lapse_per_item = get_double(j, "lapse_per_item", path);
    if (present(j, "motor_sd_ms")) o.motor_sd_ms = get_double(j, "motor_sd_ms", path);
    model = o;
  } else {
    throw SchemaError(sub(path, "type"), "expected 'preattentive' or 'serial'");
  }
  check_domain(path, [&] { validate(model); });
  return model;
}

Json log_header(const SessionLog& log) {
  return Json{{"type", "header"},
              {"schema_version", kLogSchemaVersion},
              {"participant", to_json(log.participant)},
              {"mode", to_string(log.mode)},
              {"experiment", to_string(log.experiment)},
              {"plan_seed", seed_string(log.plan_seed)},
              {"plan_trials", log.plan_trials},
              {"complete", log.complete}};
}

Json log_line(const TrialRecord& record) {
  Json line{{"type", "trial"}};
  const Json body = to_json(record);
  for (auto& [k, v] : body.items()) line[k] = v;
  return line;
}

Json log_line(const QuestionnaireResponse& q) {
  Json line{{"type", "questionnaire"}};
  const Json body = to_json(q);
  for (auto& [k, v] : body.items()) line[k] = v;
  return line;
}

std::string to_jsonl(const SessionLog& log) {
  std::string out = log_header(log).dump() + "\n";
  for (const TrialRecord& r : log.trials) out += log_line(r).dump() + "\n";
  if (log.questionnaire) out += log_line(*log.questionnaire).dump() + "\n";
  return out;
}

SessionLog log_from_jsonl(std::string_view text, const std::string& source) {
  SessionLog log;
  bool have_header = false;
  bool header_complete = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string path = source + ":" + std::to_string(line_no);
    const Json j = parse_json(line, path);
    const std::string type = get_string(j, "type", path);
    if (type == "header") {
      if (have_header) throw SchemaError(path, "duplicate header");
      have_header = true;
      if (get_int(j, "schema_version", path) != kLogSchemaVersion) {
        throw SchemaError(sub(path, "schema_version"), "unsupported version");
      }
      log.participant = participant_from_json(field(j, "participant", path), sub(path, "participant"));
      log.mode = mode_from_string(get_string(j, "mode", path), sub(path, "mode"));
      log.experiment = experiment_from_string(get_string(j, "experiment", path), sub(path, "experiment"));
      log.plan_seed = get_seed(j, "plan_seed", path);
      log.plan_trials = static_cast<std::size_t>(get_int(j, "plan_trials", path));
      header_complete = get_bool(j, "complete", path);
    } else if (!have_header) {
      throw SchemaError(path, "log must start with a header line");
    } else if (type == "trial") {
      log.trials.push_back(record_from_json(j, path));
    } else if (type == "questionnaire") {
      log.questionnaire = questionnaire_from_json(j, path);
    } else {
      throw SchemaError(sub(path, "type"), "unknown line type '" + type + "'");
    }
  }
  if (!have_header) throw SchemaError(source, "empty log");
  // Append-only logs are written before completion is known.
  log.complete = header_complete ||
                 (log.mode == SessionMode::Recorded && log.trials.size() == log.plan_trials);
  check_domain(source, [&] { validate(log); });
  return log;
}

std::string to_csv(const SessionLog& log) {
  std::ostringstream out;
  out << "trial,block,set_size,present,eye,kind,response,correct,rt_ms,target_row,target_col\n";
  auto b = [](std::optional<bool> v) -> std::string { return v ? (*v ? "1" : "0") : ""; };
  for (const TrialRecord& r : log.trials) {
    const TrialCondition& c = r.condition;
    out << r.trial_index << ',' << r.block << ',' << c.set_size << ',' << (c.target_present ? 1 : 0) << ','
        << (c.target_eye ? to_string(*c.target_eye) : "") << ','
        << (c.conjunction_target_kind ? to_string(*c.conjunction_target_kind) : "") << ',' << b(r.response)
        << ',' << b(r.correct) << ',';
    if (r.reaction_ms) out << Json(*r.reaction_ms).dump();
    out << ',';
    if (r.target_cell) out << r.target_cell->row;
    out << ',';
    if (r.target_cell) out << r.target_cell->col;
    out << '\n';
  }
  return out.str();
}

// --- files ---------------------------------------------------------------

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(source, std::string("invalid JSON: ") + e.what());
  }
}

Json read_json(const std::filesystem::path& path) { return parse_json(read_text(path), path.string()); }

SessionLog read_log(const std::filesystem::path& path) { return log_from_jsonl(read_text(path), path.string()); }

std::vector<SessionLog> read_log_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SessionLog> logs;
  for (const auto& f : files) logs.push_back(read_log(f));
  return logs;
}

}  // namespace deadeye::io
