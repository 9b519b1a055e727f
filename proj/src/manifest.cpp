#include "plottwist/manifest.hpp"

#include <chrono>
#include <ctime>

#include "plottwist/hash.hpp"
#include "plottwist/jsonl.hpp"

namespace plottwist {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs[path.string()] = sha256_file(path);
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs[path.filename().string()] = sha256_file(path);
}

void RunManifest::write(const std::filesystem::path& dir) const {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["parameters"] = parameters;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  jsonl::write_text(dir / "manifest.json", jsonl::pretty(j));
}

}  // namespace plottwist
