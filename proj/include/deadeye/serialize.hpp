#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deadeye/geometry.hpp"
#include "deadeye/observer.hpp"
#include "deadeye/protocol.hpp"
#include "deadeye/render.hpp"
#include "deadeye/session.hpp"
#include "deadeye/stimgen.hpp"

// JSON documents exchanged between the CLI, the service and the runner UI.
// Every reader reports malformed input as a SchemaError naming the offending
// path, e.g. "plan.blocks[1].trials[7].condition.set_size".
namespace deadeye::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

const char* to_string(Eye e) noexcept;
const char* to_string(Experiment e) noexcept;
const char* to_string(ConjunctionTarget k) noexcept;
const char* to_string(SessionMode m) noexcept;
const char* to_string(PhaseKind p) noexcept;
Eye eye_from_string(std::string_view s, const std::string& path);
Experiment experiment_from_string(std::string_view s, const std::string& path);
CompositeMode composite_mode_from_string(std::string_view s, const std::string& path);

Json to_json(const ColorRgb& c);
Json to_json(const GridSpec& g);
Json to_json(const Palette& p);
Json to_json(const TrialCondition& c);
Json to_json(const Stimulus& s);
Json to_json(const TrialPlan& p);
Json to_json(const ViewingGeometry& g);
Json to_json(const DisplayLayout& l);
Json to_json(const TimingConfig& t);
Json to_json(const Participant& p);
Json to_json(const QuestionnaireResponse& q);
Json to_json(const TrialRecord& r);
Json to_json(const ObserverModel& m);

ColorRgb color_from_json(const Json& j, const std::string& path);
GridSpec grid_from_json(const Json& j, const std::string& path);
Palette palette_from_json(const Json& j, const std::string& path);
TrialCondition condition_from_json(const Json& j, const std::string& path);
Stimulus stimulus_from_json(const Json& j, const std::string& path = "stimulus");
TrialPlan plan_from_json(const Json& j, const std::string& path = "plan");
ViewingGeometry geometry_from_json(const Json& j, const std::string& path);
DisplayLayout layout_from_json(const Json& j, const std::string& path);
TimingConfig timing_from_json(const Json& j, const std::string& path);
Participant participant_from_json(const Json& j, const std::string& path);
QuestionnaireResponse questionnaire_from_json(const Json& j, const std::string& path);
TrialRecord record_from_json(const Json& j, const std::string& path);
ObserverModel observer_from_json(const Json& j, const std::string& path = "observer");

// Session log as JSON lines: a header, one line per trial, then an optional
// questionnaire line.
Json log_header(const SessionLog& log);
Json log_line(const TrialRecord& record);
Json log_line(const QuestionnaireResponse& q);
std::string to_jsonl(const SessionLog& log);
SessionLog log_from_jsonl(std::string_view text, const std::string& source);

// Columns: trial, block, set_size, present, eye, kind, response, correct,
// rt_ms, target_row, target_col.
std::string to_csv(const SessionLog& log);

// Geometry, layout, timing, colours and crosshair style. Missing sections
// keep their defaults.
struct Config {
  ViewingGeometry geometry;
  DisplayLayout layout;
  TimingConfig timing;
  Palette palette;
  CrosshairStyle crosshair;
};

Config config_from_json(const Json& j, const std::string& path = "config");
Json to_json(const Config& c);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
Json parse_json(std::string_view text, const std::string& source);
Json read_json(const std::filesystem::path& path);

SessionLog read_log(const std::filesystem::path& path);
// All *.jsonl files in `dir`, in file-name order.
std::vector<SessionLog> read_log_dir(const std::filesystem::path& dir);

}  // namespace deadeye::io
