#include "plottwist/gateway.hpp"

#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "plottwist/errors.hpp"
#include "plottwist/hash.hpp"
#include "plottwist/jsonl.hpp"

namespace plottwist::gateway {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void ModelEndpoint::validate() const {
  if (model_id.empty()) throw ConfigError("endpoint model_id must be non-empty");
  if (max_retries < 0 || max_retries > 10)
    throw ConfigError("endpoint " + model_id + ": max_retries must be in [0, 10]");
  if (!(temperature >= 0.0)) throw ConfigError("endpoint " + model_id + ": temperature must be >= 0");
  if (is_remote() && base_url.empty())
    throw ConfigError("endpoint " + model_id + ": remote endpoint needs base_url");
}

std::string cache_key(const CompletionRequest& r) {
  const auto& e = r.endpoint;
  const json temp = e.temperature;
  const std::string seed = e.seed ? std::to_string(*e.seed) : std::string("none");
  return sha256_fields({e.model_id, e.base_url, temp.dump(), seed, r.system_prompt, r.user_prompt});
}

std::string prompt_fingerprint(std::string_view system_prompt, std::string_view user_prompt) {
  return sha256_fields({system_prompt, user_prompt});
}

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)) {
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (options_.cache_dir) {
    std::error_code ec;
    fs::create_directories(*options_.cache_dir, ec);
    if (ec) throw ConfigError("cannot create cache directory " + options_.cache_dir->string());
  }
}

std::optional<std::string> Gateway::cache_lookup(const std::string& key) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (!options_.cache_dir) return std::nullopt;
  const fs::path file = *options_.cache_dir / (key + ".json");
  std::error_code ec;
  if (!fs::exists(file, ec)) return std::nullopt;
  try {
    const json entry = json::parse(jsonl::read_text(file));
    std::string text = entry.at("raw_text").get<std::string>();
    std::unique_lock lock(mutex_);
    memory_.emplace(key, text);
    return text;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable entry: treat as a miss and overwrite later
  }
}

void Gateway::cache_store(const std::string& key, const CompletionRequest& request,
                          const std::string& text) {
  {
    std::unique_lock lock(mutex_);
    memory_[key] = text;
  }
  if (!options_.cache_dir) return;
  json entry;
  entry["model_id"] = request.endpoint.model_id;
  entry["base_url"] = request.endpoint.base_url;
  entry["raw_text"] = text;
  const fs::path file = *options_.cache_dir / (key + ".json");
  // Unique temp name per thread, then atomic rename (last writer wins).
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  const fs::path tmp = *options_.cache_dir / (key + "." + std::to_string(tid) + ".tmp");
  jsonl::write_text(tmp, jsonl::pretty(entry));
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) fs::remove(tmp, ec);
}

void Gateway::invalidate(const CompletionRequest& request) {
  const std::string key = cache_key(request);
  {
    std::unique_lock lock(mutex_);
    memory_.erase(key);
  }
  if (options_.cache_dir) {
    std::error_code ec;
    fs::remove(*options_.cache_dir / (key + ".json"), ec);
  }
}

CompletionResult Gateway::complete(const CompletionRequest& request) {
  request.endpoint.validate();
  if (request.user_prompt.empty()) throw DomainError("user_prompt must be non-empty");

  const std::string key = options_.use_cache ? cache_key(request) : std::string();
  if (options_.use_cache) {
    if (auto hit = cache_lookup(key)) return {*hit, true, 1};
  }

  static const HttpBackend http;
  const Backend& backend = request.endpoint.backend ? *request.endpoint.backend : http;
  const int max_attempts = request.endpoint.max_retries + 1;
  std::string last_failure;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    try {
      std::string text = backend.send(request);
      if (options_.use_cache) cache_store(key, request, text);
      return {std::move(text), false, attempt};
    } catch (const TransportError& e) {
      last_failure = e.what();
      if (!e.transient()) break;
      if (attempt < max_attempts) {
        const auto delay = request.endpoint.retry_backoff * (1LL << (attempt - 1));
        if (delay.count() > 0) options_.sleep(delay);
      }
    }
  }
  throw TransportError("model " + request.endpoint.model_id + " failed after retries: " +
                           last_failure,
                       false);
}

// ---------------------------------------------------------------------------
// Remote protocol
// ---------------------------------------------------------------------------

std::string chat_request_body(const CompletionRequest& r) {
  json body;
  body["model"] = r.endpoint.model_id;
  json messages = json::array();
  if (!r.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", r.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", r.user_prompt}});
  body["messages"] = std::move(messages);
  body["temperature"] = r.endpoint.temperature;
  if (r.endpoint.seed) body["seed"] = *r.endpoint.seed;
  return jsonl::dump(body);
}

std::string parse_chat_response(std::string_view body) {
  try {
    const json j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const std::exception& e) {
    throw TransportError(std::string("malformed chat completion response: ") + e.what(), false);
  }
}

namespace {

struct Url {
  std::string scheme_host_port;
  std::string path_prefix;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base_url '" + url + "' lacks a scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  Url u;
  u.scheme_host_port = url.substr(0, path_start);
  u.path_prefix = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!u.path_prefix.empty() && u.path_prefix.back() == '/') u.path_prefix.pop_back();
  return u;
}

}  // namespace

std::string HttpBackend::send(const CompletionRequest& request) const {
  const auto& e = request.endpoint;
  std::string key;
  if (!e.credentials_ref.empty()) {
    const char* v = std::getenv(e.credentials_ref.c_str());
    if (v == nullptr || *v == '\0')
      throw ConfigError("endpoint " + e.model_id + ": environment variable " + e.credentials_ref +
                        " is not set");
    key = v;
  }

  const Url url = split_url(e.base_url);
  httplib::Client client(url.scheme_host_port);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(e.timeout);
  client.set_write_timeout(e.timeout);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  auto res = client.Post(url.path_prefix + "/chat/completions", headers,
                         chat_request_body(request), "application/json");
  if (!res) throw TransportError("HTTP transport error: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  if (res->status != 200)
    throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200),
                         false);
  return parse_chat_response(res->body);
}

// ---------------------------------------------------------------------------
// Structured output extraction
// ---------------------------------------------------------------------------

namespace {

// End offset (exclusive) of the balanced {...} starting at `start`, honoring
// JSON string literals, or npos.
std::size_t balanced_object_end(std::string_view s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

}  // namespace

int extract_integer_field(std::string_view raw, std::string_view field, int lo, int hi) {
  if (lo > hi) throw DomainError("extract_integer_field: lo > hi");
  const std::string raw_copy(raw);
  const std::string key(field);
  bool parsed_any = false;
  bool saw_field = false;

  for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
    const std::size_t end = balanced_object_end(raw, pos);
    if (end == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(raw.substr(pos, end - pos));
    } catch (const json::parse_error&) {
      continue;
    }
    if (!obj.is_object()) continue;
    parsed_any = true;
    auto it = obj.find(key);
    if (it == obj.end()) continue;
    saw_field = true;
    if (!it->is_number_integer()) continue;
    const long long v = it->get<long long>();
    if (v < lo || v > hi)
      throw ExtractionError(ExtractionError::Kind::Range,
                            "field " + key + " = " + std::to_string(v) + " outside [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]",
                            raw_copy);
    return static_cast<int>(v);
  }

  if (!parsed_any)
    throw ExtractionError(ExtractionError::Kind::Format, "no parsable JSON object in model output",
                          raw_copy);
  throw ExtractionError(ExtractionError::Kind::MissingField,
                        saw_field ? "field " + key + " has no integer value"
                                  : "field " + key + " absent from model output",
                        raw_copy);
}

}  // namespace plottwist::gateway
