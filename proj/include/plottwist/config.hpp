#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "plottwist/curation.hpp"
#include "plottwist/gateway.hpp"
#include "plottwist/generation.hpp"

// JSON configuration files. An endpoint object looks like
//
//   {"model_id": "gpt-4.1", "base_url": "https://api.openai.com/v1",
//    "credentials_ref": "OPENAI_API_KEY", "temperature": 0.7, "seed": 11,
//    "max_retries": 2, "retry_backoff_ms": 250, "timeout_s": 120}
//
// or, for a scripted mock, {"model_id": "m", "script": "scripts/m.json"}
// (path relative to the config file) or {"model_id": "m", "mock": {...}}.
// Credentials are only ever read from the environment variable named by
// credentials_ref ("NAME" or "${NAME}").
namespace plottwist::config {

using json = nlohmann::ordered_json;

/// Collects the canonical form of every configuration file a run uses and
/// hashes it for the run manifest. Mock scripts enter by content hash so
/// that editing a script changes the hash while moving it does not.
class ConfigSet {
 public:
  void add(const std::string& role, json canonical);
  const json& document() const { return doc_; }
  std::string hash() const;

 private:
  json doc_ = json::object();
};

json read_json_file(const std::filesystem::path& path);

gateway::ModelEndpoint parse_endpoint(const json& j, const std::filesystem::path& base_dir,
                                      json* canonical = nullptr);

generation::GenerationConfig parse_generation_config(const json& j,
                                                     const std::filesystem::path& base_dir,
                                                     json* canonical = nullptr);

/// {"endpoints": [...]} or a bare array.
std::vector<gateway::ModelEndpoint> load_ensemble(const std::filesystem::path& path, ConfigSet& set);

/// {"premise": endpoint, "base": generator, "frontier": [generator...]}.
/// A top-level "prompt_template" applies to generators lacking their own.
curation::GeneratorSet load_generators(const std::filesystem::path& path, ConfigSet& set);

/// An endpoint object, optionally wrapped as {"endpoint": {...}}.
gateway::ModelEndpoint load_judge(const std::filesystem::path& path, ConfigSet& set);

/// {"endpoints": [generator...], "prompt_template": ..., "max_output_words": ...}.
std::vector<generation::GenerationConfig> load_models(const std::filesystem::path& path,
                                                      ConfigSet& set);

/// Gives an endpoint without a configured sampling seed one derived from the
/// run seed, so remote sampling is reproducible from the top-level seed too.
void assign_seed(gateway::ModelEndpoint& endpoint, std::uint64_t run_seed, const std::string& stage);

}  // namespace plottwist::config
