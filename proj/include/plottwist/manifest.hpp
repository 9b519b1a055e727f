#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace plottwist {

/// Provenance record written next to every stage's outputs. Digests are
/// SHA-256 of file contents keyed by file name.
struct RunManifest {
  std::string stage;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string started_at;   ///< UTC, ISO 8601
  std::string finished_at;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void write(const std::filesystem::path& dir) const;
};

std::string utc_timestamp();

}  // namespace plottwist
