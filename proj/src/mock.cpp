#include "plottwist/mock.hpp"

#include <algorithm>
#include <regex>

#include "plottwist/errors.hpp"
#include "plottwist/jsonl.hpp"

namespace plottwist::gateway {

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (auto it = j.find(key); it != j.end()) {
    if (it->is_string()) return {it->get<std::string>()};
    if (!it->is_array()) throw ConfigError(std::string("mock rule key '") + key + "' must be a list");
    for (const auto& s : *it) out.push_back(s.get<std::string>());
  }
  return out;
}

MockReply reply_from_json(const json& j) {
  if (j.is_string()) return {j.get<std::string>(), std::nullopt};
  if (j.is_object() && j.contains("fail")) return {"", j["fail"].get<std::string>()};
  if (j.is_object() && j.contains("text")) return {j["text"].get<std::string>(), std::nullopt};
  throw ConfigError("mock reply must be a string, {\"text\": ...} or {\"fail\": ...}");
}

json reply_to_json(const MockReply& r) {
  if (r.failure) return json{{"fail", *r.failure}};
  return r.text;
}

std::string substitute(std::string text, const std::vector<std::pair<std::string, std::string>>& vars) {
  for (const auto& [name, value] : vars) {
    const std::string token = "{{" + name + "}}";
    for (std::size_t pos = text.find(token); pos != std::string::npos;
         pos = text.find(token, pos + value.size()))
      text.replace(pos, token.size(), value);
  }
  return text;
}

}  // namespace

MockScript mock_script_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("mock script must be a JSON object");
  MockScript script;
  try {
    if (auto rules = j.find("rules"); rules != j.end()) {
      for (const auto& r : *rules) {
        MockRule rule;
        rule.name = r.value("name", std::string());
        rule.all_of = string_list(r, "all");
        rule.any_of = string_list(r, "any");
        rule.none_of = string_list(r, "none");
        if (auto c = r.find("capture"); c != r.end())
          for (auto it = c->begin(); it != c->end(); ++it)
            rule.captures.emplace_back(it.key(), it.value().get<std::string>());
        if (auto resp = r.find("respond"); resp != r.end()) rule.replies.push_back(reply_from_json(*resp));
        if (auto seq = r.find("sequence"); seq != r.end())
          for (const auto& s : *seq) rule.replies.push_back(reply_from_json(s));
        if (rule.replies.empty()) throw ConfigError("mock rule '" + rule.name + "' has no reply");
        script.rules.push_back(std::move(rule));
      }
    }
    if (auto rec = j.find("recorded"); rec != j.end())
      for (auto it = rec->begin(); it != rec->end(); ++it)
        script.recorded.emplace(it.key(), it.value().get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed mock script: ") + e.what());
  }
  return script;
}

json to_json(const MockScript& script) {
  json j = json::object();
  if (!script.rules.empty()) {
    json rules = json::array();
    for (const auto& r : script.rules) {
      json o;
      if (!r.name.empty()) o["name"] = r.name;
      if (!r.all_of.empty()) o["all"] = r.all_of;
      if (!r.any_of.empty()) o["any"] = r.any_of;
      if (!r.none_of.empty()) o["none"] = r.none_of;
      if (!r.captures.empty()) {
        json c = json::object();
        for (const auto& [name, re] : r.captures) c[name] = re;
        o["capture"] = c;
      }
      if (r.replies.size() == 1) {
        o["respond"] = reply_to_json(r.replies.front());
      } else {
        json seq = json::array();
        for (const auto& rep : r.replies) seq.push_back(reply_to_json(rep));
        o["sequence"] = seq;
      }
      rules.push_back(std::move(o));
    }
    j["rules"] = std::move(rules);
  }
  if (!script.recorded.empty()) {
    json rec = json::object();
    for (const auto& [fp, text] : script.recorded) rec[fp] = text;
    j["recorded"] = std::move(rec);
  }
  return j;
}

MockScript load_mock_script(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(jsonl::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("mock script " + path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return mock_script_from_json(j);
}

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {
  for (const auto& rule : script_.rules) {
    auto& compiled = captures_.emplace_back();
    for (const auto& [name, re] : rule.captures) {
      try {
        compiled.emplace_back(re);
      } catch (const std::regex_error&) {
        throw ConfigError("mock rule '" + rule.name + "': bad capture regex for " + name);
      }
    }
  }
}

std::string MockBackend::send(const CompletionRequest& request) const {
  const std::string fp = prompt_fingerprint(request.system_prompt, request.user_prompt);
  if (auto it = script_.recorded.find(fp); it != script_.recorded.end()) return it->second;

  const std::string text = request.system_prompt + "\n\n" + request.user_prompt;
  auto contains = [&](const std::string& needle) { return text.find(needle) != std::string::npos; };

  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const MockRule& rule = script_.rules[i];
    if (!std::all_of(rule.all_of.begin(), rule.all_of.end(), contains)) continue;
    if (!rule.any_of.empty() && std::none_of(rule.any_of.begin(), rule.any_of.end(), contains)) continue;
    if (std::any_of(rule.none_of.begin(), rule.none_of.end(), contains)) continue;

    std::vector<std::pair<std::string, std::string>> vars;
    bool captured = true;
    for (std::size_t c = 0; c < rule.captures.size(); ++c) {
      std::smatch m;
      if (!std::regex_search(text, m, captures_[i][c]) || m.size() < 2) {
        captured = false;
        break;
      }
      vars.emplace_back(rule.captures[c].first, m[1].str());
    }
    if (!captured) continue;

    std::size_t call = 0;
    {
      std::lock_guard lock(mutex_);
      call = calls_[{i, fp}]++;
    }
    const MockReply& reply = rule.replies[std::min(call, rule.replies.size() - 1)];
    if (reply.failure) throw TransportError("mock failure: " + *reply.failure);
    return substitute(reply.text, vars);
  }
  throw ScriptGapError("mock " + request.endpoint.model_id + ": no rule matches request " +
                       fp.substr(0, 12));
}

ModelEndpoint mock_backend(std::string model_id, MockScript script, int max_retries) {
  if (script.empty()) throw ConfigError("mock script for " + model_id + " is empty");
  ModelEndpoint e;
  e.model_id = std::move(model_id);
  e.base_url = "mock://" + e.model_id;
  e.max_retries = max_retries;
  e.retry_backoff = std::chrono::milliseconds(0);
  e.backend = std::make_shared<MockBackend>(std::move(script));
  return e;
}

void SessionRecorder::add(const std::string& fingerprint, const std::string& text) {
  std::lock_guard lock(mutex_);
  entries_[fingerprint] = text;
}

MockScript SessionRecorder::script() const {
  std::lock_guard lock(mutex_);
  MockScript s;
  s.recorded = entries_;
  return s;
}

void SessionRecorder::save(const std::filesystem::path& path) const {
  jsonl::write_text(path, jsonl::pretty(to_json(script())));
}

namespace {

class RecordingBackend final : public Backend {
 public:
  RecordingBackend(std::shared_ptr<const Backend> inner, std::shared_ptr<SessionRecorder> recorder)
      : inner_(std::move(inner)), recorder_(std::move(recorder)) {}

  std::string send(const CompletionRequest& request) const override {
    static const HttpBackend http;
    std::string text = inner_ ? inner_->send(request) : http.send(request);
    recorder_->add(prompt_fingerprint(request.system_prompt, request.user_prompt), text);
    return text;
  }

 private:
  std::shared_ptr<const Backend> inner_;
  std::shared_ptr<SessionRecorder> recorder_;
};

}  // namespace

ModelEndpoint record_session(ModelEndpoint endpoint, std::shared_ptr<SessionRecorder> recorder) {
  endpoint.backend = std::make_shared<RecordingBackend>(endpoint.backend, std::move(recorder));
  return endpoint;
}

}  // namespace plottwist::gateway
