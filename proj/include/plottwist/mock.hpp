#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "plottwist/gateway.hpp"

namespace plottwist::gateway {

using json = nlohmann::ordered_json;

/// One scripted reply: either text or a transient transport failure.
struct MockReply {
  std::string text;
  std::optional<std::string> failure;
};

/// A rule matches when every `all_of` substring occurs in the prompt text
/// (system + user), at least one `any_of` does (if any are given), no
/// `none_of` does, and every capture regex finds a match. Captured group 1 is
/// substituted for `{{name}}` in the reply. The k-th call for one prompt gets
/// `replies[min(k, size-1)]`, which scripts failure schedules.
struct MockRule {
  std::string name;
  std::vector<std::string> all_of;
  std::vector<std::string> any_of;
  std::vector<std::string> none_of;
  std::vector<std::pair<std::string, std::string>> captures;
  std::vector<MockReply> replies;
};

struct MockScript {
  std::vector<MockRule> rules;
  /// prompt_fingerprint -> reply text (record/replay sessions). Checked
  /// before the rules.
  std::map<std::string, std::string> recorded;

  bool empty() const noexcept { return rules.empty() && recorded.empty(); }
};

MockScript mock_script_from_json(const json& j);
json to_json(const MockScript& script);
MockScript load_mock_script(const std::filesystem::path& path);

/// Deterministic scripted backend. A request no rule covers raises
/// ScriptGapError.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockScript script);
  std::string send(const CompletionRequest& request) const override;

 private:
  MockScript script_;
  std::vector<std::vector<std::regex>> captures_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::size_t, std::string>, std::size_t> calls_;
};

/// Endpoint whose completions come from `script`. Throws ConfigError for an
/// empty script.
ModelEndpoint mock_backend(std::string model_id, MockScript script, int max_retries = 2);

/// Collects prompt_fingerprint -> response for every successful call made
/// through an endpoint wrapped by `record_session`.
class SessionRecorder {
 public:
  void add(const std::string& fingerprint, const std::string& text);
  /// Script replaying exactly the recorded responses.
  MockScript script() const;
  void save(const std::filesystem::path& path) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::string> entries_;
};

ModelEndpoint record_session(ModelEndpoint endpoint, std::shared_ptr<SessionRecorder> recorder);

}  // namespace plottwist::gateway
