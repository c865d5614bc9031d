#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "deadeye/error.hpp"
#include "deadeye/render.hpp"
#include "deadeye/serialize.hpp"
#include "deadeye/session.hpp"
#include "deadeye/stimgen.hpp"

namespace httplib {
class Server;
}

namespace deadeye::service {

inline constexpr int kBundleSchemaVersion = 1;

struct AssetEntry {
  std::size_t trial = 0;
  std::string path;  // relative to the bundle's directory
};

struct AssetManifest {
  CompositeMode mode = CompositeMode::Anaglyph;
  std::vector<AssetEntry> files;
};

// Everything the runner UI needs: the plan, one parametric stimulus per trial,
// display and timing configuration, sound ids and, optionally, pre-rendered
// images as a fallback.
io::Json make_bundle(const TrialPlan& plan, const io::Config& config,
                     const std::optional<AssetManifest>& assets = std::nullopt, std::size_t training_trials = 10);

struct Bundle {
  TrialPlan plan;
  io::Config config;
  std::optional<AssetManifest> assets;
  io::Json json;
};

// Validates a bundle document. With `base_dir` set, manifest entries must
// name existing files under it.
Bundle bundle_from_json(const io::Json& j, const std::optional<std::filesystem::path>& base_dir = std::nullopt);

class NotFound : public Error {
 public:
  using Error::Error;
};

class Conflict : public Error {
 public:
  using Error::Error;
};

struct IngestResult {
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::size_t received = 0;
  bool complete = false;
};

// Sessions of one bundle, persisted as one append-only JSON-lines file per
// session. Each session has its own lock; the map lock only guards lookup and
// creation.
class SessionStore {
 public:
  SessionStore(std::filesystem::path dir, TrialPlan plan);

  std::string create(const Participant& participant, SessionMode mode);

  // Records must extend the session in increasing trial order. A record whose
  // index is already stored is a no-op when identical and a Conflict
  // otherwise. All-or-nothing per batch.
  IngestResult add_records(const std::string& id, const std::vector<TrialRecord>& records);
  void set_questionnaire(const std::string& id, const QuestionnaireResponse& q);

  SessionLog snapshot(const std::string& id) const;
  std::vector<SessionLog> all() const;
  std::vector<std::string> ids() const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  struct Session {
    mutable std::mutex mutex;
    SessionLog log;
    std::filesystem::path file;
  };

  Session& find(const std::string& id) const;
  void append(const Session& s, const std::string& line);
  void recover();

  std::filesystem::path dir_;
  TrialPlan plan_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

// The HTTP API. Responses are JSON; failures carry {"error", "path"?}.
class Server {
 public:
  Server(Bundle bundle, SessionStore& store, std::optional<std::filesystem::path> asset_dir = std::nullopt);
  ~Server();

  httplib::Server& http() noexcept { return *http_; }
  bool listen(const std::string& host, int port);
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  void routes();

  Bundle bundle_;
  std::string bundle_body_;
  SessionStore& store_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace deadeye::service
