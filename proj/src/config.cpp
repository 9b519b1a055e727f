#include "plottwist/config.hpp"

#include <algorithm>
#include <cctype>

#include "plottwist/errors.hpp"
#include "plottwist/hash.hpp"
#include "plottwist/jsonl.hpp"
#include "plottwist/mock.hpp"
#include "plottwist/rng.hpp"

namespace plottwist::config {

namespace fs = std::filesystem;

void ConfigSet::add(const std::string& role, json canonical) { doc_[role] = std::move(canonical); }

std::string ConfigSet::hash() const { return sha256_hex(doc_.dump()); }

json read_json_file(const fs::path& path) {
  std::string text;
  try {
    text = jsonl::read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

namespace {

const std::vector<std::string> kEndpointKeys = {
    "model_id", "base_url",         "credentials_ref", "temperature", "seed",  "max_retries",
    "retry_backoff_ms", "timeout_s", "script",          "mock",        "prompt_template",
    "max_output_words"};

std::string credential_name(std::string ref) {
  if (ref.size() > 3 && ref.rfind("${", 0) == 0 && ref.back() == '}') ref = ref.substr(2, ref.size() - 3);
  for (char c : ref)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
      throw ConfigError("credentials_ref must name an environment variable, got '" + ref + "'");
  return ref;
}

}  // namespace

gateway::ModelEndpoint parse_endpoint(const json& j, const fs::path& base_dir, json* canonical) {
  if (!j.is_object()) throw ConfigError("endpoint must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(kEndpointKeys.begin(), kEndpointKeys.end(), it.key()) == kEndpointKeys.end())
      throw ConfigError("unknown endpoint key '" + it.key() + "'");

  gateway::ModelEndpoint e;
  json canon = json::object();
  try {
    e.model_id = j.at("model_id").get<std::string>();
    canon["model_id"] = e.model_id;

    const bool scripted = j.contains("script") || j.contains("mock");
    if (scripted) {
      gateway::MockScript script;
      if (j.contains("script")) {
        const fs::path p = base_dir / j["script"].get<std::string>();
        script = gateway::load_mock_script(p);
        canon["script_sha256"] = sha256_file(p);
      } else {
        script = gateway::mock_script_from_json(j["mock"]);
        canon["script_sha256"] = sha256_hex(j["mock"].dump());
      }
      const int retries = j.value("max_retries", 2);
      e = gateway::mock_backend(e.model_id, std::move(script), retries);
    } else {
      if (!j.contains("base_url")) throw ConfigError("endpoint " + e.model_id + " needs base_url or script");
      e.retry_backoff = std::chrono::milliseconds(j.value("retry_backoff_ms", 250));
      e.max_retries = j.value("max_retries", 2);
    }
    if (j.contains("base_url")) e.base_url = j["base_url"].get<std::string>();
    if (j.contains("credentials_ref")) e.credentials_ref = credential_name(j["credentials_ref"].get<std::string>());
    e.temperature = j.value("temperature", 0.0);
    if (j.contains("seed")) e.seed = j["seed"].get<std::int64_t>();
    if (j.contains("retry_backoff_ms")) e.retry_backoff = std::chrono::milliseconds(j["retry_backoff_ms"].get<int>());
    e.timeout = std::chrono::seconds(j.value("timeout_s", 120));
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed endpoint: ") + ex.what());
  }
  e.validate();

  canon["base_url"] = e.base_url;
  canon["credentials_ref"] = e.credentials_ref;
  canon["temperature"] = e.temperature;
  canon["seed"] = e.seed ? json(*e.seed) : json(nullptr);
  canon["max_retries"] = e.max_retries;
  canon["retry_backoff_ms"] = e.retry_backoff.count();
  canon["timeout_s"] = e.timeout.count();
  if (canonical) *canonical = std::move(canon);
  return e;
}

generation::GenerationConfig parse_generation_config(const json& j, const fs::path& base_dir,
                                                     json* canonical) {
  generation::GenerationConfig c;
  json canon;
  c.endpoint = parse_endpoint(j, base_dir, &canon);
  try {
    if (j.contains("prompt_template")) c.prompt_template = j["prompt_template"].get<std::string>();
    if (j.contains("max_output_words")) {
      const auto n = j["max_output_words"].get<std::int64_t>();
      if (n <= 0) throw ConfigError("max_output_words must be positive");
      c.max_output_words = static_cast<std::size_t>(n);
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed generator: ") + ex.what());
  }
  c.validate();
  canon["prompt_template"] = c.prompt_template;
  canon["max_output_words"] = c.max_output_words ? json(*c.max_output_words) : json(nullptr);
  if (canonical) *canonical = std::move(canon);
  return c;
}

std::vector<gateway::ModelEndpoint> load_ensemble(const fs::path& path, ConfigSet& set) {
  const json j = read_json_file(path);
  const json& list = j.is_array() ? j : j.value("endpoints", json());
  if (!list.is_array() || list.empty()) throw ConfigError(path.string() + ": ensemble needs a non-empty endpoint list");
  std::vector<gateway::ModelEndpoint> out;
  json canon = json::array();
  for (const auto& item : list) {
    json c;
    out.push_back(parse_endpoint(item, path.parent_path(), &c));
    canon.push_back(std::move(c));
  }
  set.add("ensemble", std::move(canon));
  return out;
}

namespace {

json with_default_template(json j, const json& top) {
  if (j.is_object() && !j.contains("prompt_template") && top.contains("prompt_template"))
    j["prompt_template"] = top["prompt_template"];
  if (j.is_object() && !j.contains("max_output_words") && top.contains("max_output_words"))
    j["max_output_words"] = top["max_output_words"];
  return j;
}

}  // namespace

curation::GeneratorSet load_generators(const fs::path& path, ConfigSet& set) {
  const json j = read_json_file(path);
  if (!j.is_object() || !j.contains("premise") || !j.contains("base") || !j.contains("frontier"))
    throw ConfigError(path.string() + ": generators config needs premise, base and frontier");
  const fs::path dir = path.parent_path();
  curation::GeneratorSet g;
  json canon = json::object();
  json c;
  g.premise = parse_endpoint(j["premise"], dir, &c);
  canon["premise"] = std::move(c);
  g.base = parse_generation_config(with_default_template(j["base"], j), dir, &c);
  canon["base"] = std::move(c);
  if (!j["frontier"].is_array() || j["frontier"].empty())
    throw ConfigError(path.string() + ": frontier must be a non-empty list");
  canon["frontier"] = json::array();
  for (const auto& f : j["frontier"]) {
    g.frontier.push_back(parse_generation_config(with_default_template(f, j), dir, &c));
    canon["frontier"].push_back(std::move(c));
  }
  set.add("generators", std::move(canon));
  return g;
}

gateway::ModelEndpoint load_judge(const fs::path& path, ConfigSet& set) {
  const json j = read_json_file(path);
  json c;
  auto e = parse_endpoint(j.contains("endpoint") ? j["endpoint"] : j, path.parent_path(), &c);
  set.add("judge", std::move(c));
  return e;
}

std::vector<generation::GenerationConfig> load_models(const fs::path& path, ConfigSet& set) {
  const json j = read_json_file(path);
  const json& list = j.is_array() ? j : j.value("endpoints", json());
  if (!list.is_array() || list.empty()) throw ConfigError(path.string() + ": models config needs a non-empty endpoint list");
  const json top = j.is_object() ? j : json::object();
  std::vector<generation::GenerationConfig> out;
  json canon = json::array();
  for (const auto& item : list) {
    json c;
    out.push_back(parse_generation_config(with_default_template(item, top), path.parent_path(), &c));
    canon.push_back(std::move(c));
  }
  set.add("models", std::move(canon));
  return out;
}

void assign_seed(gateway::ModelEndpoint& endpoint, std::uint64_t run_seed, const std::string& stage) {
  if (endpoint.seed) return;
  endpoint.seed = static_cast<std::int64_t>(derive_seed(run_seed, stage + "/" + endpoint.model_id) & 0x7fffffffULL);
}

}  // namespace plottwist::config
