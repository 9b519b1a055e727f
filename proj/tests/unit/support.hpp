#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "plottwist/gateway.hpp"
#include "plottwist/mock.hpp"

namespace plottwist::testing {

inline const std::filesystem::path kSource = PLOTTWIST_SOURCE_DIR;
inline const std::filesystem::path kFixtures = kSource / "tests/fixtures";

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("plottwist-unit-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
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

inline gateway::ModelEndpoint scripted(const std::string& id, const gateway::json& script, int max_retries = 2) {
  return gateway::mock_backend(id, gateway::mock_script_from_json(script), max_retries);
}

/// Gateway without a disk cache whose backoff does not sleep.
inline gateway::Gateway quiet_gateway(bool use_cache = true) {
  return gateway::Gateway({.cache_dir = std::nullopt, .use_cache = use_cache, .sleep = [](auto) {}});
}

}  // namespace plottwist::testing
