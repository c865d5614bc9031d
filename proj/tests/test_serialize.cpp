#include <doctest.h>

#include <sstream>

#include "deadeye/error.hpp"
#include "deadeye/serialize.hpp"
#include "support.hpp"

using namespace deadeye;
using deadeye::io::Json;

namespace {

std::string schema_path(const std::function<void()>& f) {
  try {
    f();
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<no SchemaError>";
}

SessionLog sample_log(Experiment e = Experiment::Conjunction, std::uint64_t seed = 3) {
  const TrialPlan plan = generate_plan(e, seed);
  auto logs = simulate_cohort(e == Experiment::Conjunction ? ObserverModel{SerialObserver{}}
                                                           : ObserverModel{PreattentiveObserver{}},
                              plan, 2, seed);
  QuestionnaireResponse q;
  q.nasa_tlx = {40, 15, 30, 25, 55, 10};
  q.clearness = 5;
  q.decision_making = 4;
  q.focus = 6;
  q.headache = true;
  logs[0].questionnaire = q;
  return logs[0];
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

TEST_CASE("plans round-trip through JSON") {
  for (Experiment e : {Experiment::Preattentive, Experiment::Conjunction}) {
    const TrialPlan plan = generate_plan(e, 0xFFFFFFFFFFFFFFF1ull);
    const Json j = io::to_json(plan);
    CHECK(j["seed"] == "18446744073709551601");
    CHECK(j["kind"] == "deadeye.plan");
    const TrialPlan back = io::plan_from_json(io::parse_json(j.dump(), "plan.json"));
    CHECK(back == plan);
    CHECK(io::to_json(back).dump() == j.dump());
    for (std::size_t i = 0; i < plan.size(); i += 37) {
      const Stimulus s = instantiate_trial(plan, i);
      CHECK(io::stimulus_from_json(io::to_json(s)) == s);
    }
  }
}

TEST_CASE("seeds may be numbers or decimal strings") {
  const TrialPlan plan = generate_plan(Experiment::Preattentive, 5);
  Json j = io::to_json(plan);
  j["seed"] = 5;
  CHECK(io::plan_from_json(j).seed == 5);
  j["seed"] = "five";
  CHECK(schema_path([&] { io::plan_from_json(j); }) == "plan.seed");
  j["seed"] = -1;
  CHECK(schema_path([&] { io::plan_from_json(j); }) == "plan.seed");
}

TEST_CASE("schema errors name the offending path") {
  const Json good = io::to_json(generate_plan(Experiment::Conjunction, 8));

  Json j = good;
  j["blocks"][1]["trials"][7]["condition"]["set_size"] = "eight";
  CHECK(schema_path([&] { io::plan_from_json(j); }) == "plan.blocks[1].trials[7].condition.set_size");

  j = good;
  j["blocks"][0]["trials"][3]["condition"]["target_eye"] = "middle";
  CHECK(schema_path([&] { io::plan_from_json(j); }) == "plan.blocks[0].trials[3].condition.target_eye");

  j = good;
  j["grid"].erase("rows");
  CHECK(schema_path([&] { io::plan_from_json(j); }) == "plan.grid.rows");

  j = good;
  j["palette"]["magenta"] = {300, 0, 0};
  CHECK(schema_path([&] { io::plan_from_json(j); }).rfind("plan.palette.magenta", 0) == 0);

  j = good;
  j["schema_version"] = 99;
  CHECK(schema_path([&] { io::plan_from_json(j); }) == "plan.schema_version");

  // Domain validation is reported as a schema error too.
  j = good;
  j["blocks"][2]["trials"].erase(0);
  CHECK(schema_path([&] { io::plan_from_json(j); }).rfind("plan", 0) == 0);

  try {
    io::plan_from_json(Json::array());
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).rfind("plan: ", 0) == 0);
  }
  CHECK_THROWS_AS(io::parse_json("{nope", "x.json"), SchemaError);
}

TEST_CASE("session logs round-trip through JSON lines") {
  for (Experiment e : {Experiment::Preattentive, Experiment::Conjunction}) {
    const SessionLog log = sample_log(e);
    const std::string text = io::to_jsonl(log);
    const auto lines = lines_of(text);
    REQUIRE(lines.size() == log.trials.size() + 2);
    CHECK(io::parse_json(lines.front(), "h")["type"] == "header");
    CHECK(io::parse_json(lines.back(), "q")["type"] == "questionnaire");
    const SessionLog back = io::log_from_jsonl(text, "log.jsonl");
    CHECK(back == log);
    CHECK(io::to_jsonl(back) == text);
  }
}

TEST_CASE("log reader errors carry file and line") {
  const SessionLog log = sample_log();
  auto lines = lines_of(io::to_jsonl(log));

  auto path_for = [&](const std::vector<std::string>& ls) {
    return schema_path([&] { io::log_from_jsonl(join(ls), "s.jsonl"); });
  };

  auto bad = lines;
  bad[5] = "{\"type\":\"trial\",";
  CHECK(path_for(bad) == "s.jsonl:6");

  bad = lines;
  Json rec = io::parse_json(bad[3], "x");
  rec["condition"]["set_size"] = -4;
  bad[3] = rec.dump();
  CHECK(path_for(bad).rfind("s.jsonl:4", 0) == 0);

  bad = lines;
  bad.erase(bad.begin());
  CHECK(path_for(bad).rfind("s.jsonl:1", 0) == 0);

  bad = lines;
  bad.insert(bad.begin() + 2, lines[0]);
  CHECK(path_for(bad).rfind("s.jsonl:3", 0) == 0);

  bad = lines;
  Json header = io::parse_json(bad[0], "x");
  header["schema_version"] = 2;
  bad[0] = header.dump();
  CHECK(path_for(bad).rfind("s.jsonl:1", 0) == 0);

  // A record whose correctness contradicts its response.
  bad = lines;
  rec = io::parse_json(bad[1], "x");
  rec["correct"] = !rec["correct"].get<bool>();
  bad[1] = rec.dump();
  CHECK(path_for(bad).rfind("s.jsonl:2", 0) == 0);

  CHECK_THROWS_AS(io::log_from_jsonl("", "empty.jsonl"), SchemaError);
}

TEST_CASE("partial recorded logs are incomplete") {
  SessionLog log = sample_log();
  log.complete = false;
  log.trials.resize(20);
  log.questionnaire.reset();
  const SessionLog back = io::log_from_jsonl(io::to_jsonl(log), "p.jsonl");
  CHECK_FALSE(back.complete);
  CHECK(back.trials.size() == 20);
}

TEST_CASE("client flags survive a round trip") {
  SessionLog log = sample_log(Experiment::Preattentive);
  log.trials[4].flags = {"exposure_out_of_tolerance"};
  const SessionLog back = io::log_from_jsonl(io::to_jsonl(log), "f.jsonl");
  CHECK(back.trials[4].flags == log.trials[4].flags);
}

TEST_CASE("csv export") {
  const SessionLog log = sample_log();
  const auto lines = lines_of(io::to_csv(log));
  REQUIRE(lines.size() == log.trials.size() + 1);
  CHECK(lines[0] == "trial,block,set_size,present,eye,kind,response,correct,rt_ms,target_row,target_col");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 10);
  }
  const TrialRecord& first = log.trials[0];
  CHECK(lines[1].rfind("0," + std::to_string(first.block) + "," + std::to_string(first.condition.set_size) + ",", 0) == 0);
}

TEST_CASE("config documents") {
  io::Config c;
  c.timing.refresh_hz = 144;
  c.timing.feedback_ms = 750;
  c.geometry.distance_cm = 250;
  c.crosshair.arm_px = 20;
  const io::Config back = io::config_from_json(io::to_json(c));
  CHECK(back.timing == c.timing);
  CHECK(back.geometry.distance_cm == 250);
  CHECK(back.crosshair.arm_px == 20);

  const io::Config partial = io::config_from_json(Json::parse(R"({"timing":{"refresh_hz":120}})"));
  CHECK(partial.timing.refresh_hz == 120);
  CHECK(partial.timing.fixation_ms == 2500);
  CHECK(partial.geometry.distance_cm == io::Config{}.geometry.distance_cm);

  CHECK(schema_path([] { io::config_from_json(Json::parse(R"({"timing":{"refresh_hz":0}})")); })
            .rfind("config.timing", 0) == 0);
  CHECK(schema_path([] { io::config_from_json(Json::parse(R"({"geometry":{"distance_cm":"far"}})")); }) ==
        "config.geometry.distance_cm");
}

TEST_CASE("observer documents") {
  SerialObserver s;
  s.per_item_ms = 150;
  const ObserverModel m = s;
  CHECK(io::observer_from_json(io::to_json(m)) == m);
  const ObserverModel p = PreattentiveObserver{};
  CHECK(io::observer_from_json(io::to_json(p)) == p);
  CHECK(io::observer_from_json(Json::parse(R"({"type":"serial"})")) == ObserverModel{SerialObserver{}});
  CHECK(schema_path([] { io::observer_from_json(Json::parse(R"({"type":"psychic"})")); }) == "observer.type");
  CHECK(schema_path([] { io::observer_from_json(Json::parse(R"({"type":"serial","lapse_per_item":2})")); })
            .rfind("observer", 0) == 0);
}

TEST_CASE("log directories are read in file-name order") {
  testing::TempDir dir;
  const TrialPlan plan = generate_plan(Experiment::Preattentive, 4);
  const auto logs = simulate_cohort(PreattentiveObserver{}, plan, 3, 4);
  io::write_text(dir / "c.jsonl", io::to_jsonl(logs[0]));
  io::write_text(dir / "a.jsonl", io::to_jsonl(logs[1]));
  io::write_text(dir / "b.jsonl", io::to_jsonl(logs[2]));
  io::write_text(dir / "notes.txt", "ignored");
  const auto back = io::read_log_dir(dir.path());
  REQUIRE(back.size() == 3);
  CHECK(back[0] == logs[1]);
  CHECK(back[1] == logs[2]);
  CHECK(back[2] == logs[0]);
  CHECK_THROWS_AS(io::read_log(dir / "missing.jsonl"), Error);
}
