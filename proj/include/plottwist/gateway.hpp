#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

namespace plottwist::gateway {

struct CompletionRequest;

/// Something that turns one request into raw model text. Throws
/// TransportError (transient or not), ScriptGapError or ConfigError.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string send(const CompletionRequest& request) const = 0;
};

struct ModelEndpoint {
  std::string model_id;
  std::string base_url;
  /// Name of the environment variable holding the API key. Empty means the
  /// remote server expects no Authorization header.
  std::string credentials_ref;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
  int max_retries = 2;
  std::chrono::milliseconds retry_backoff{250};
  std::chrono::seconds timeout{120};
  /// Local backend (mock, recorder). Null means remote HTTP at base_url.
  std::shared_ptr<const Backend> backend;

  bool is_remote() const noexcept { return backend == nullptr; }
  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct CompletionRequest {
  ModelEndpoint endpoint;
  std::string system_prompt;
  std::string user_prompt;
};

struct CompletionResult {
  std::string raw_text;
  bool cached = false;
  int attempts = 1;
};

/// Content hash over (model_id, base_url, temperature, seed, system, user).
std::string cache_key(const CompletionRequest& request);

/// Hash of the prompt pair alone; keys recorded sessions.
std::string prompt_fingerprint(std::string_view system_prompt, std::string_view user_prompt);

struct GatewayOptions {
  /// Persistent cache directory; entries are `<cache_key>.json`.
  std::optional<std::filesystem::path> cache_dir;
  bool use_cache = true;
  /// Replaceable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Uniform completion entry point: retries transient failures with
/// exponential backoff and serves repeated requests from a content-addressed
/// cache. Safe to call concurrently.
class Gateway {
 public:
  explicit Gateway(GatewayOptions options = {});

  CompletionResult complete(const CompletionRequest& request);

  /// Drops a cached response, e.g. one that failed downstream validation.
  void invalidate(const CompletionRequest& request);

 private:
  std::optional<std::string> cache_lookup(const std::string& key);
  void cache_store(const std::string& key, const CompletionRequest& request,
                   const std::string& text);

  GatewayOptions options_;
  std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> memory_;
};

/// Sends OpenAI-compatible `POST <base_url>/chat/completions` requests.
class HttpBackend final : public Backend {
 public:
  std::string send(const CompletionRequest& request) const override;
};

/// Request body for the remote protocol (exposed for tests).
std::string chat_request_body(const CompletionRequest& request);
/// Text of choices[0].message.content; throws TransportError otherwise.
std::string parse_chat_response(std::string_view body);

/// Finds the first balanced JSON object in `raw` holding an integer `field`
/// and returns its value, which must lie in [lo, hi]. Throws ExtractionError.
int extract_integer_field(std::string_view raw, std::string_view field, int lo, int hi);

}  // namespace plottwist::gateway
