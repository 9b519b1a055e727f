#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plottwist/domain.hpp"
#include "plottwist/errors.hpp"
#include "plottwist/gateway.hpp"

namespace plottwist::judge {

inline constexpr std::size_t kCriteria = 10;

struct RubricSpec {
  Aspect aspect = Aspect::Pacing;
  std::array<std::string_view, kCriteria> criteria;  ///< criterion i+1
  std::string prompt_template;                        ///< full system prompt
};

/// The ten-criterion rubric for `aspect`.
const RubricSpec& rubric(Aspect aspect);

struct Prompt {
  std::string system_prompt;
  std::string user_prompt;
};

Prompt render_rubric_prompt(Aspect aspect, const PlotRecord& plot);

/// Why a judge report was rejected. `index` is the criterion (1..10) the error
/// concerns, or 0 for the TOTAL line / the report as a whole.
class RubricError : public Error {
 public:
  enum class Kind { Parse, Range, Grid, Consistency };

  RubricError(Kind kind, int index, const std::string& what, std::string raw)
      : Error(what), kind_(kind), index_(index), raw_(std::move(raw)) {}

  Kind kind() const noexcept { return kind_; }
  int index() const noexcept { return index_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  Kind kind_;
  int index_;
  std::string raw_;
};

struct RubricReport {
  Aspect aspect = Aspect::Pacing;
  std::array<double, kCriteria> criterion_scores{};
  double declared_total = 0.0;
  std::string raw_text;

  bool operator==(const RubricReport&) const = default;
};

/// Score grid step and the tolerances applied to judge reports.
inline constexpr double kGridTolerance = 1e-9;
inline constexpr double kTotalTolerance = 0.05;

/// Extracts `<i>. <name>: <score>` lines and the `TOTAL: <x>/10` line from
/// raw judge output, tolerating surrounding prose and markdown decoration.
/// Throws RubricError.
RubricReport parse_rubric_report(const std::string& raw, const RubricSpec& spec);

/// Renders a report in the rubric's output format (one decimal per score).
std::string format_rubric_report(const RubricReport& report);

struct JudgeVerdict {
  std::string plot_id;
  std::optional<std::string> generator_id;
  std::string group;  ///< row label for summary tables
  PerAspect<RubricReport> per_aspect;
  PerAspect<double> per_aspect_score{};
  PerAspect<int> attempts{};
  double mean_score = 0.0;
};

/// Verdict from five accepted reports (in kAllAspects order).
JudgeVerdict make_verdict(const PlotRecord& plot, PerAspect<RubricReport> reports,
                          PerAspect<int> attempts = {1, 1, 1, 1, 1});

class VerdictIncompleteError : public Error {
 public:
  VerdictIncompleteError(const std::string& what, std::vector<Aspect> failed)
      : Error(what), failed_(std::move(failed)) {}
  const std::vector<Aspect>& failed() const noexcept { return failed_; }

 private:
  std::vector<Aspect> failed_;
};

/// Runs all five rubrics. A report that fails validation is re-requested
/// (bypassing the cache) up to the endpoint's retry budget.
JudgeVerdict judge_plot(const PlotRecord& plot, const gateway::ModelEndpoint& judge_endpoint,
                        gateway::Gateway& gateway);

struct SummaryRow {
  std::string label;
  std::size_t n = 0;
  PerAspect<double> mean{};
  PerAspect<double> sd{};
  double overall_mean = 0.0;
  double overall_sd = 0.0;
};

/// Per-group mean and sample standard deviation, rows sorted by label.
std::vector<SummaryRow> summarize(std::span<const JudgeVerdict> verdicts);

struct JudgeFailure {
  std::string plot_id;
  std::string error;
};

struct CorpusJudgement {
  std::vector<JudgeVerdict> verdicts;  ///< input order, failed plots omitted
  std::vector<JudgeFailure> failures;
  std::vector<SummaryRow> summary;
};

CorpusJudgement judge_corpus(std::span<const PlotRecord> plots,
                             const gateway::ModelEndpoint& judge_endpoint,
                             gateway::Gateway& gateway, int jobs = 1);

json to_json(const JudgeVerdict& v);
JudgeVerdict verdict_from_json(const json& j);

}  // namespace plottwist::judge
