#include "plottwist/judge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>

#include "plottwist/parallel.hpp"
#include "plottwist/stats.hpp"

namespace plottwist::judge {

namespace {

// Lower-cases ASCII, folds unicode dashes to '-', and drops spaces so that
// "Genre–Tone Alignment" and "genre - tone alignment" compare equal.
std::string normalize_name(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == 0xE2 && i + 2 < s.size()) {
      const auto b1 = static_cast<unsigned char>(s[i + 1]);
      const auto b2 = static_cast<unsigned char>(s[i + 2]);
      // U+2010..U+2015 dashes, U+2212 minus
      if ((b1 == 0x80 && b2 >= 0x90 && b2 <= 0x95) || (b1 == 0x88 && b2 == 0x92)) {
        out += '-';
        i += 2;
        continue;
      }
    }
    if (std::isspace(c)) continue;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

// Strips markdown decoration that models like to add around report lines.
std::string clean_line(std::string_view line) {
  std::string out;
  for (char c : line)
    if (c != '*' && c != '`' && c != '#' && c != '_' && c != '\r') out += c;
  const auto first = out.find_first_not_of(" \t>-");
  if (first == std::string::npos) return {};
  out.erase(0, first);
  return out;
}

bool on_grid(double v) { return std::abs(v * 10.0 - std::round(v * 10.0)) <= kGridTolerance * 10.0; }

const std::regex& criterion_re() {
  static const std::regex re(R"(^(\d{1,2})\s*[.)]\s*([^:]+?)\s*:\s*([-+]?\d*\.?\d+)(?![\d.]))");
  return re;
}

const std::regex& total_re() {
  static const std::regex re(R"(^total(?:\s+score)?\s*:\s*([-+]?\d*\.?\d+)(?![\d.])\s*(?:/\s*10(?:\.0+)?)?)",
                             std::regex::icase);
  return re;
}

}  // namespace

RubricReport parse_rubric_report(const std::string& raw, const RubricSpec& spec) {
  std::array<std::optional<double>, kCriteria> scores;
  std::array<bool, kCriteria> name_mismatch{};
  std::optional<double> total;

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t end = raw.find('\n', pos);
    if (end == std::string::npos) end = raw.size();
    const std::string line = clean_line(std::string_view(raw).substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;

    std::smatch m;
    if (std::regex_search(line, m, total_re())) {
      if (!total) total = std::stod(m[1].str());
      continue;
    }
    if (!std::regex_search(line, m, criterion_re())) continue;
    const int index = std::stoi(m[1].str());
    if (index < 1 || index > static_cast<int>(kCriteria)) continue;
    const auto slot = static_cast<std::size_t>(index - 1);
    if (scores[slot]) continue;
    if (normalize_name(m[2].str()) != normalize_name(spec.criteria[slot])) {
      name_mismatch[slot] = true;
      continue;
    }
    scores[slot] = std::stod(m[3].str());
  }

  RubricReport report;
  report.aspect = spec.aspect;
  report.raw_text = raw;
  for (std::size_t i = 0; i < kCriteria; ++i) {
    const int index = static_cast<int>(i) + 1;
    const std::string label = std::to_string(index) + " (" + std::string(spec.criteria[i]) + ")";
    if (!scores[i])
      throw RubricError(RubricError::Kind::Parse, index,
                        name_mismatch[i] ? "criterion " + label + " has the wrong name"
                                         : "criterion " + label + " missing",
                        raw);
  }
  if (!total) throw RubricError(RubricError::Kind::Parse, 0, "TOTAL line missing", raw);

  double sum = 0.0;
  for (std::size_t i = 0; i < kCriteria; ++i) {
    const double v = *scores[i];
    const int index = static_cast<int>(i) + 1;
    if (v < -kGridTolerance || v > 1.0 + kGridTolerance)
      throw RubricError(RubricError::Kind::Range, index,
                        "criterion " + std::to_string(index) + " score " + std::to_string(v) +
                            " outside [0,1]",
                        raw);
    if (!on_grid(v))
      throw RubricError(RubricError::Kind::Grid, index,
                        "criterion " + std::to_string(index) + " score " + std::to_string(v) +
                            " is not a multiple of 0.1",
                        raw);
    report.criterion_scores[i] = v;
    sum += v;
  }
  if (*total < 0.0 || *total > 10.0)
    throw RubricError(RubricError::Kind::Range, 0, "TOTAL outside [0,10]", raw);
  if (std::abs(sum - *total) > kTotalTolerance + kGridTolerance)
    throw RubricError(RubricError::Kind::Consistency, 0,
                      "criteria sum " + std::to_string(sum) + " disagrees with TOTAL " +
                          std::to_string(*total),
                      raw);
  report.declared_total = *total;
  return report;
}

std::string format_rubric_report(const RubricReport& report) {
  const RubricSpec& spec = rubric(report.aspect);
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < kCriteria; ++i) {
    std::snprintf(buf, sizeof buf, ": %.1f\n", report.criterion_scores[i]);
    out += std::to_string(i + 1) + ". " + std::string(spec.criteria[i]) + buf;
  }
  std::snprintf(buf, sizeof buf, "TOTAL: %.1f/10\n", report.declared_total);
  out += buf;
  return out;
}

JudgeVerdict make_verdict(const PlotRecord& plot, PerAspect<RubricReport> reports,
                          PerAspect<int> attempts) {
  JudgeVerdict v;
  v.plot_id = plot.id;
  v.generator_id = plot.generator_id;
  v.group = plot.generator_id ? *plot.generator_id : std::string(to_string(plot.source_label));
  double sum = 0.0;
  for (Aspect a : kAllAspects) {
    const auto i = index_of(a);
    v.per_aspect_score[i] = reports[i].declared_total;
    sum += reports[i].declared_total;
  }
  v.per_aspect = std::move(reports);
  v.attempts = attempts;
  v.mean_score = sum / static_cast<double>(kAspectCount);
  return v;
}

JudgeVerdict judge_plot(const PlotRecord& plot, const gateway::ModelEndpoint& judge_endpoint,
                        gateway::Gateway& gateway) {
  PerAspect<RubricReport> reports;
  PerAspect<int> attempts{};
  std::vector<Aspect> failed;
  std::string errors;

  for (Aspect a : kAllAspects) {
    const Prompt prompt = render_rubric_prompt(a, plot);
    const gateway::CompletionRequest request{judge_endpoint, prompt.system_prompt, prompt.user_prompt};
    const int budget = judge_endpoint.max_retries + 1;
    bool ok = false;
    std::string last_error;
    for (int attempt = 1; attempt <= budget && !ok; ++attempt) {
      attempts[index_of(a)] = attempt;
      try {
        const auto result = gateway.complete(request);
        reports[index_of(a)] = parse_rubric_report(result.raw_text, rubric(a));
        ok = true;
      } catch (const RubricError& e) {
        last_error = e.what();
        gateway.invalidate(request);
      } catch (const TransportError& e) {
        last_error = e.what();
        break;
      }
    }
    if (!ok) {
      failed.push_back(a);
      errors += std::string(errors.empty() ? "" : "; ") + std::string(display_name(a)) + ": " + last_error;
    }
  }
  if (!failed.empty())
    throw VerdictIncompleteError("plot " + plot.id + " verdict incomplete: " + errors, failed);
  return make_verdict(plot, std::move(reports), attempts);
}

std::vector<SummaryRow> summarize(std::span<const JudgeVerdict> verdicts) {
  std::map<std::string, std::vector<const JudgeVerdict*>> groups;
  for (const auto& v : verdicts) groups[v.group].push_back(&v);

  auto mean_sd = [](const std::vector<double>& xs) -> std::pair<double, double> {
    const double m = stats::mean(xs);
    return {m, xs.size() > 1 ? std::sqrt(stats::sample_variance(xs)) : 0.0};
  };

  std::vector<SummaryRow> rows;
  for (const auto& [label, members] : groups) {
    SummaryRow row;
    row.label = label;
    row.n = members.size();
    for (Aspect a : kAllAspects) {
      std::vector<double> xs;
      for (const auto* v : members) xs.push_back(v->per_aspect_score[index_of(a)]);
      std::tie(row.mean[index_of(a)], row.sd[index_of(a)]) = mean_sd(xs);
    }
    std::vector<double> overall;
    for (const auto* v : members) overall.push_back(v->mean_score);
    std::tie(row.overall_mean, row.overall_sd) = mean_sd(overall);
    rows.push_back(std::move(row));
  }
  return rows;
}

CorpusJudgement judge_corpus(std::span<const PlotRecord> plots,
                             const gateway::ModelEndpoint& judge_endpoint,
                             gateway::Gateway& gateway, int jobs) {
  std::vector<std::optional<JudgeVerdict>> verdicts(plots.size());
  std::vector<std::string> errors(plots.size());

  // Configuration problems abort the run; everything else is a per-plot gap.
  parallel_for(plots.size(), jobs, [&](std::size_t i) {
    try {
      verdicts[i] = judge_plot(plots[i], judge_endpoint, gateway);
    } catch (const ConfigError&) {
      throw;
    } catch (const ScriptGapError&) {
      throw;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  CorpusJudgement out;
  for (std::size_t i = 0; i < plots.size(); ++i) {
    if (verdicts[i]) out.verdicts.push_back(std::move(*verdicts[i]));
    else out.failures.push_back({plots[i].id, errors[i]});
  }
  out.summary = summarize(out.verdicts);
  return out;
}

json to_json(const JudgeVerdict& v) {
  json j;
  j["plot_id"] = v.plot_id;
  if (v.generator_id) j["generator_id"] = *v.generator_id;
  j["group"] = v.group;
  j["mean_score"] = v.mean_score;
  json aspects = json::object();
  for (Aspect a : kAllAspects) {
    const auto i = index_of(a);
    const RubricReport& r = v.per_aspect[i];
    json aj;
    aj["score"] = v.per_aspect_score[i];
    aj["criteria"] = r.criterion_scores;
    aj["attempts"] = v.attempts[i];
    aj["raw_text"] = r.raw_text;
    aspects[std::string(field_name(a))] = std::move(aj);
  }
  j["aspects"] = std::move(aspects);
  return j;
}

JudgeVerdict verdict_from_json(const json& j) {
  try {
    PlotRecord stub;
    stub.id = j.at("plot_id").get<std::string>();
    if (j.contains("generator_id")) stub.generator_id = j["generator_id"].get<std::string>();
    PerAspect<RubricReport> reports;
    PerAspect<int> attempts{};
    for (Aspect a : kAllAspects) {
      const json& aj = j.at("aspects").at(std::string(field_name(a)));
      reports[index_of(a)] = parse_rubric_report(aj.at("raw_text").get<std::string>(), rubric(a));
      attempts[index_of(a)] = aj.value("attempts", 1);
    }
    JudgeVerdict v = make_verdict(stub, std::move(reports), attempts);
    if (j.contains("group")) v.group = j["group"].get<std::string>();
    return v;
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed verdict record: ") + e.what());
  }
}

}  // namespace plottwist::judge
