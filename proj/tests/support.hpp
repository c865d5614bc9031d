#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "deadeye/observer.hpp"
#include "deadeye/protocol.hpp"
#include "deadeye/stimgen.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("deadeye-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path data_file(const std::string& name) {
  return std::filesystem::path(DEADEYE_TEST_DATA) / name;
}

// Responder that answers every trial correctly after a fixed delay.
class OracleResponder final : public deadeye::Responder {
 public:
  explicit OracleResponder(double rt_ms = 400.0) : rt_ms_(rt_ms) {}
  std::optional<deadeye::ResponseDecision> respond(const deadeye::Stimulus& s, std::size_t) override {
    return deadeye::ResponseDecision{s.condition.target_present, rt_ms_};
  }

 private:
  double rt_ms_;
};

class ConstantResponder final : public deadeye::Responder {
 public:
  ConstantResponder(bool yes, double rt_ms) : yes_(yes), rt_ms_(rt_ms) {}
  std::optional<deadeye::ResponseDecision> respond(const deadeye::Stimulus&, std::size_t) override {
    return deadeye::ResponseDecision{yes_, rt_ms_};
  }

 private:
  bool yes_;
  double rt_ms_;
};

inline deadeye::SessionLog run_with(const deadeye::TrialPlan& plan, deadeye::Responder& responder,
                                    const std::string& id = "p01",
                                    deadeye::Eye dominant = deadeye::Eye::Right) {
  deadeye::FixedRateClock clock(60.0);
  deadeye::SessionOptions opts;
  opts.participant.id = id;
  opts.participant.dominant_eye = dominant;
  return deadeye::run_session(plan, responder, clock, opts);
}

}  // namespace testing
