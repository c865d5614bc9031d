#include "deadeye/service.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <httplib.h>

#include "deadeye/report.hpp"

namespace deadeye::service {

namespace {

using io::Json;

const char* mode_name(CompositeMode m) {
  switch (m) {
    case CompositeMode::Anaglyph: return "anaglyph";
    case CompositeMode::SideBySide: return "sbs";
    case CompositeMode::PerEyeFiles: return "per-eye";
  }
  return "?";
}

}  // namespace

io::Json make_bundle(const TrialPlan& plan, const io::Config& config, const std::optional<AssetManifest>& assets,
                     std::size_t training_trials) {
  Json stimuli = Json::array();
  for (std::size_t i = 0; i < plan.size(); ++i) stimuli.push_back(io::to_json(instantiate_trial(plan, i)));
  Json manifest = nullptr;
  if (assets) {
    Json files = Json::array();
    for (const AssetEntry& e : assets->files) files.push_back(Json{{"trial", e.trial}, {"path", e.path}});
    manifest = Json{{"mode", mode_name(assets->mode)}, {"files", files}};
  }
  const Json cfg = io::to_json(config);
  return Json{{"schema_version", kBundleSchemaVersion},
              {"kind", "deadeye.bundle"},
              {"plan", io::to_json(plan)},
              {"stimuli", stimuli},
              {"assets", manifest},
              {"geometry", cfg["geometry"]},
              {"layout", cfg["layout"]},
              {"timing", cfg["timing"]},
              {"palette", cfg["palette"]},
              {"crosshair", cfg["crosshair"]},
              {"sounds", Json{{"correct", "correct"}, {"incorrect", "incorrect"}, {"neutral", "neutral"}}},
              {"training_trials", training_trials}};
}

Bundle bundle_from_json(const io::Json& j, const std::optional<std::filesystem::path>& base_dir) {
  if (!j.is_object()) throw SchemaError("bundle", "expected an object");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw SchemaError("bundle.schema_version", "missing or not an integer");
  }
  const int version = j["schema_version"].get<int>();
  if (version < 1 || version > kBundleSchemaVersion) {
    throw SchemaError("bundle.schema_version", "unsupported version " + std::to_string(version));
  }
  if (j.value("kind", "") != "deadeye.bundle") throw SchemaError("bundle.kind", "not an experiment bundle");
  if (!j.contains("plan")) throw SchemaError("bundle.plan", "missing field");
  Bundle b;
  b.plan = io::plan_from_json(j["plan"], "bundle.plan");

  Json cfg = Json::object();
  for (const char* key : {"geometry", "layout", "timing", "palette", "crosshair"}) {
    if (j.contains(key)) cfg[key] = j[key];
  }
  b.config = io::config_from_json(cfg, "bundle");

  if (!j.contains("stimuli") || !j["stimuli"].is_array()) throw SchemaError("bundle.stimuli", "expected an array");
  const Json& stimuli = j["stimuli"];
  if (stimuli.size() != b.plan.size()) {
    throw SchemaError("bundle.stimuli", "expected " + std::to_string(b.plan.size()) + " stimuli, got " +
                                            std::to_string(stimuli.size()));
  }
  for (std::size_t i = 0; i < stimuli.size(); ++i) {
    const std::string path = "bundle.stimuli[" + std::to_string(i) + "]";
    io::stimulus_from_json(stimuli[i], path);
    if (stimuli[i] != io::to_json(instantiate_trial(b.plan, i))) {
      throw SchemaError(path, "does not match the plan");
    }
  }

  if (j.contains("assets") && !j["assets"].is_null()) {
    const Json& a = j["assets"];
    if (!a.is_object() || !a.contains("mode") || !a["mode"].is_string()) {
      throw SchemaError("bundle.assets.mode", "expected a string");
    }
    AssetManifest m;
    m.mode = io::composite_mode_from_string(a["mode"].get<std::string>(), "bundle.assets.mode");
    if (!a.contains("files") || !a["files"].is_array()) throw SchemaError("bundle.assets.files", "expected an array");
    for (std::size_t i = 0; i < a["files"].size(); ++i) {
      const std::string path = "bundle.assets.files[" + std::to_string(i) + "]";
      const Json& f = a["files"][i];
      if (!f.is_object() || !f.contains("trial") || !f["trial"].is_number_unsigned() || !f.contains("path") ||
          !f["path"].is_string()) {
        throw SchemaError(path, "expected {trial, path}");
      }
      AssetEntry e{f["trial"].get<std::size_t>(), f["path"].get<std::string>()};
      if (e.trial >= b.plan.size()) throw SchemaError(path + ".trial", "outside the plan");
      const std::filesystem::path rel(e.path);
      if (rel.is_absolute() || e.path.find("..") != std::string::npos) {
        throw SchemaError(path + ".path", "must be a relative path inside the bundle directory");
      }
      if (base_dir && !std::filesystem::is_regular_file(*base_dir / rel)) {
        throw SchemaError(path + ".path", "file not found: " + e.path);
      }
      m.files.push_back(std::move(e));
    }
    b.assets = std::move(m);
  }
  b.json = j;
  return b;
}

// --- session store ---------------------------------------------------------

SessionStore::SessionStore(std::filesystem::path dir, TrialPlan plan) : dir_(std::move(dir)), plan_(std::move(plan)) {
  std::filesystem::create_directories(dir_);
  recover();
}

void SessionStore::recover() {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::string text = io::read_text(f);
    // A crash can leave half a line behind; it was never acknowledged.
    if (!text.empty() && text.back() != '\n') {
      text.erase(text.find_last_of('\n') == std::string::npos ? 0 : text.find_last_of('\n') + 1);
      io::write_text(f, text);
    }
    auto s = std::make_unique<Session>();
    s->log = io::log_from_jsonl(text, f.string());
    s->file = f;
    const std::string id = f.stem().string();
    unsigned long long n = 0;
    if (std::sscanf(id.c_str(), "session-%llu", &n) == 1) next_id_ = std::max<std::uint64_t>(next_id_, n + 1);
    sessions_.emplace(id, std::move(s));
  }
}

std::string SessionStore::create(const Participant& participant, SessionMode mode) {
  std::unique_lock lock(map_mutex_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "session-%04llu", static_cast<unsigned long long>(next_id_++));
  const std::string id = buf;
  auto s = std::make_unique<Session>();
  s->log.participant = participant;
  s->log.mode = mode;
  s->log.experiment = plan_.experiment;
  s->log.plan_seed = plan_.seed;
  s->log.plan_trials = plan_.size();
  s->log.complete = false;
  s->file = dir_ / (id + ".jsonl");
  io::write_text(s->file, io::log_header(s->log).dump() + "\n");
  sessions_.emplace(id, std::move(s));
  return id;
}

SessionStore::Session& SessionStore::find(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return *it->second;
}

void SessionStore::append(const Session& s, const std::string& lines) {
  std::ofstream out(s.file, std::ios::binary | std::ios::app);
  out << lines;
  out.flush();
  if (!out) throw Error("failed to append to " + s.file.string());
}

IngestResult SessionStore::add_records(const std::string& id, const std::vector<TrialRecord>& records) {
  Session& s = find(id);
  std::lock_guard lock(s.mutex);
  SessionLog& log = s.log;
  IngestResult result;
  std::vector<const TrialRecord*> fresh;
  std::optional<std::size_t> last;
  if (!log.trials.empty()) last = log.trials.back().trial_index;

  for (const TrialRecord& r : records) {
    auto it = std::find_if(log.trials.begin(), log.trials.end(),
                           [&](const TrialRecord& t) { return t.trial_index == r.trial_index; });
    if (it != log.trials.end()) {
      if (!(*it == r)) throw Conflict("trial " + std::to_string(r.trial_index) + " already stored with other data");
      ++result.duplicates;
      continue;
    }
    auto fit = std::find_if(fresh.begin(), fresh.end(), [&](const TrialRecord* t) { return t->trial_index == r.trial_index; });
    if (fit != fresh.end()) {
      if (!(**fit == r)) throw Conflict("trial " + std::to_string(r.trial_index) + " appears twice with other data");
      ++result.duplicates;
      continue;
    }
    if (last && r.trial_index <= *last) {
      throw Conflict("trial " + std::to_string(r.trial_index) + " arrives after trial " + std::to_string(*last));
    }
    if (log.mode == SessionMode::Recorded && r.trial_index >= plan_.size()) {
      throw SchemaError("records.trial_index", "trial " + std::to_string(r.trial_index) + " is outside the plan");
    }
    if (!(r.condition == plan_.at(r.trial_index % plan_.size()).condition)) {
      throw SchemaError("records.condition", "trial " + std::to_string(r.trial_index) + " does not match the plan");
    }
    last = r.trial_index;
    fresh.push_back(&r);
  }

  std::string lines;
  for (const TrialRecord* r : fresh) {
    lines += io::log_line(*r).dump() + "\n";
  }
  if (!lines.empty()) append(s, lines);
  for (const TrialRecord* r : fresh) log.trials.push_back(*r);
  log.complete = log.mode == SessionMode::Recorded && log.trials.size() == log.plan_trials;
  result.accepted = fresh.size();
  result.received = log.trials.size();
  result.complete = log.complete;
  return result;
}

void SessionStore::set_questionnaire(const std::string& id, const QuestionnaireResponse& q) {
  Session& s = find(id);
  std::lock_guard lock(s.mutex);
  if (s.log.questionnaire) {
    if (*s.log.questionnaire == q) return;
    throw Conflict("questionnaire already stored with other answers");
  }
  append(s, io::log_line(q).dump() + "\n");
  s.log.questionnaire = q;
}

SessionLog SessionStore::snapshot(const std::string& id) const {
  Session& s = find(id);
  std::lock_guard lock(s.mutex);
  return s.log;
}

std::vector<std::string> SessionStore::ids() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

std::vector<SessionLog> SessionStore::all() const {
  std::vector<SessionLog> out;
  for (const std::string& id : ids()) out.push_back(snapshot(id));
  return out;
}

// --- HTTP ------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, const std::string& path = {}) {
  Json body{{"error", message}};
  if (!path.empty()) body["path"] = path;
  send_json(res, status, body);
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const NotFound& e) {
      send_error(res, 404, e.what());
    } catch (const Conflict& e) {
      send_error(res, 409, e.what());
    } catch (const SchemaError& e) {
      send_error(res, 400, e.what(), e.path());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

Json body_json(const httplib::Request& req) { return io::parse_json(req.body, "body"); }

}  // namespace

Server::Server(Bundle bundle, SessionStore& store, std::optional<std::filesystem::path> asset_dir)
    : bundle_(std::move(bundle)), store_(store), http_(std::make_unique<httplib::Server>()) {
  bundle_body_ = bundle_.json.dump();
  if (asset_dir) http_->set_mount_point("/bundle", asset_dir->string());
  routes();
}

Server::~Server() = default;

void Server::routes() {
  httplib::Server& s = *http_;

  s.Get("/api/bundle", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(bundle_body_, "application/json");
  });

  s.Post("/api/session", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const Json body = body_json(req);
           if (!body.is_object() || !body.contains("participant")) {
             throw SchemaError("body.participant", "missing field");
           }
           const Participant p = io::participant_from_json(body["participant"], "body.participant");
           SessionMode mode = SessionMode::Recorded;
           if (body.contains("mode")) {
             const std::string m = body["mode"].is_string() ? body["mode"].get<std::string>() : "";
             if (m == "training") {
               mode = SessionMode::Training;
             } else if (m != "recorded") {
               throw SchemaError("body.mode", "expected 'training' or 'recorded'");
             }
           }
           const std::string id = store_.create(p, mode);
           send_json(res, 201, Json{{"session_id", id}, {"plan_trials", bundle_.plan.size()}});
         }));

  s.Get(R"(/api/session/([A-Za-z0-9_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const SessionLog log = store_.snapshot(req.matches[1]);
          send_json(res, 200,
                    Json{{"session_id", std::string(req.matches[1])},
                         {"participant", io::to_json(log.participant)},
                         {"mode", io::to_string(log.mode)},
                         {"received", log.trials.size()},
                         {"plan_trials", log.plan_trials},
                         {"complete", log.complete},
                         {"questionnaire", log.questionnaire.has_value()}});
        }));

  s.Post(R"(/api/session/([A-Za-z0-9_-]+)/records)",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const std::string id = req.matches[1];
           store_.snapshot(id);  // 404 before parsing the body
           const Json body = body_json(req);
           const Json* arr = &body;
           std::string base = "body";
           if (body.is_object() && body.contains("records")) {
             arr = &body["records"];
             base = "body.records";
           }
           if (!arr->is_array()) throw SchemaError(base, "expected an array of trial records");
           std::vector<TrialRecord> records;
           for (std::size_t i = 0; i < arr->size(); ++i) {
             records.push_back(io::record_from_json((*arr)[i], base + "[" + std::to_string(i) + "]"));
           }
           const IngestResult r = store_.add_records(id, records);
           send_json(res, 200,
                     Json{{"accepted", r.accepted},
                          {"duplicates", r.duplicates},
                          {"received", r.received},
                          {"complete", r.complete}});
         }));

  s.Post(R"(/api/session/([A-Za-z0-9_-]+)/questionnaire)",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const std::string id = req.matches[1];
           store_.snapshot(id);
           const QuestionnaireResponse q = io::questionnaire_from_json(body_json(req), "body");
           store_.set_questionnaire(id, q);
           send_json(res, 200, Json{{"stored", true}});
         }));

  s.Get(R"(/api/session/([A-Za-z0-9_-]+)/report)",
        guarded([this](const httplib::Request& req, httplib::Response& res) {
          const std::vector<SessionLog> logs{store_.snapshot(req.matches[1])};
          res.set_content(report::dump(report::build(logs)), "application/json");
        }));

  s.Get("/api/report", guarded([this](const httplib::Request&, httplib::Response& res) {
          const std::vector<SessionLog> logs = store_.all();
          res.set_content(report::dump(report::build(logs)), "application/json");
        }));
}

bool Server::listen(const std::string& host, int port) { return http_->listen(host, port); }
int Server::bind_to_any_port(const std::string& host) { return http_->bind_to_any_port(host); }
bool Server::listen_after_bind() { return http_->listen_after_bind(); }
void Server::stop() { http_->stop(); }

}  // namespace deadeye::service
