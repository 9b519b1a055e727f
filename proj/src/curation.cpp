#include "plottwist/curation.hpp"

#include <algorithm>
#include <numeric>

#include "plottwist/errors.hpp"
#include "plottwist/jsonl.hpp"
#include "plottwist/parallel.hpp"

namespace plottwist::curation {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Premises
// ---------------------------------------------------------------------------

PremisePrompt render_premise_prompt(const PlotRecord& plot) {
  PremisePrompt p;
  p.system_prompt =
      "You condense movie plots into premises. A premise names the setting, the genre and the "
      "central conflict or constraint of a story in one sentence and does not reveal how it ends.";
  p.user_prompt =
      "Write the premise of the plot below as one sentence that completes the phrase "
      "\"Generate a movie plot that follows\". Reply with that sentence only.\n\n### MoviePlot: " +
      plot.text;
  return p;
}

namespace {

std::string tidy_premise(std::string s) {
  const auto ws = " \t\r\n\"'";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

}  // namespace

Premise generate_premise(const PlotRecord& plot, const gateway::ModelEndpoint& generator,
                         gateway::Gateway& gateway) {
  if (plot.text.empty()) throw DomainError("plot " + plot.id + " is empty");
  const PremisePrompt prompt = render_premise_prompt(plot);
  const auto result = gateway.complete({generator, prompt.system_prompt, prompt.user_prompt});
  Premise premise;
  premise.id = "premise-" + plot.id;
  premise.text = tidy_premise(result.raw_text);
  premise.source_plot_id = plot.id;
  if (premise.text.empty())
    throw ExtractionError(ExtractionError::Kind::Format,
                          "blank premise from " + generator.model_id + " for plot " + plot.id,
                          result.raw_text);
  return premise;
}

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

std::string_view to_string(RejectedPolicy p) {
  return p == RejectedPolicy::Base ? "base" : "runner_up";
}

RejectedPolicy rejected_policy_from_string(std::string_view s) {
  if (s == "base") return RejectedPolicy::Base;
  if (s == "runner_up") return RejectedPolicy::RunnerUp;
  throw ConfigError("rejected_policy must be base or runner_up, got '" + std::string(s) + "'");
}

std::string_view to_string(RejectionReason r) {
  switch (r) {
    case RejectionReason::PremiseFailed: return "premise_failed";
    case RejectionReason::BaseMissing: return "base_missing";
    case RejectionReason::ScoringFailed: return "scoring_failed";
    case RejectionReason::BestNotFrontier: return "best_not_frontier";
    case RejectionReason::BelowThreshold: return "threshold";
    case RejectionReason::InsufficientMargin: return "margin";
  }
  return "unknown";
}

void CandidateSet::validate() const {
  if (frontier_ids.count(base_id)) throw DomainError("base generator " + base_id + " is also frontier");
  std::set<std::string> seen;
  for (const auto& c : candidates)
    if (!seen.insert(c.generator_id).second)
      throw DomainError("generator " + c.generator_id + " appears twice for " + premise.id);
  if (!seen.count(base_id)) throw DomainError("base generator " + base_id + " has no candidate for " + premise.id);
}

Selection select_preference_pair(const CandidateSet& set, const SelectionOptions& options) {
  set.validate();
  const auto& cs = set.candidates;

  auto is_frontier = [&](std::size_t i) { return set.frontier_ids.count(cs[i].generator_id) > 0; };
  // Strict weak "better than" used to pick best: higher score, then
  // frontier over non-frontier, then smaller id.
  auto better = [&](std::size_t i, std::size_t j) {
    if (cs[i].overall != cs[j].overall) return cs[i].overall > cs[j].overall;
    if (is_frontier(i) != is_frontier(j)) return is_frontier(i);
    return cs[i].generator_id < cs[j].generator_id;
  };

  std::size_t best = 0;
  for (std::size_t i = 1; i < cs.size(); ++i)
    if (better(i, best)) best = i;

  Selection out;
  if (!is_frontier(best)) {
    out.reason = RejectionReason::BestNotFrontier;
    return out;
  }
  if (!(cs[best].overall > options.threshold + kScoreTolerance)) {
    out.reason = RejectionReason::BelowThreshold;
    return out;
  }
  std::optional<std::size_t> runner;
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (i != best && (!runner || better(i, *runner))) runner = i;
  // The base candidate always exists, so a frontier best has a runner-up.
  const double gap = cs[best].overall - cs[*runner].overall;
  if (gap < options.margin - kScoreTolerance) {
    out.reason = RejectionReason::InsufficientMargin;
    return out;
  }

  std::size_t rejected = *runner;
  if (options.policy == RejectedPolicy::Base)
    for (std::size_t i = 0; i < cs.size(); ++i)
      if (cs[i].generator_id == set.base_id) rejected = i;

  PreferencePair p;
  p.premise_id = set.premise.id;
  p.premise_text = set.premise.text;
  p.prompt = set.prompt;
  p.chosen_text = cs[best].plot.text;
  p.rejected_text = cs[rejected].plot.text;
  p.chosen_score = cs[best].overall;
  p.rejected_score = cs[rejected].overall;
  p.runner_up_score = cs[*runner].overall;
  p.margin = gap;
  p.audit = {cs[best].generator_id, cs[*runner].generator_id, cs[rejected].generator_id,
             options.threshold, options.margin, options.policy};
  out.pair = std::move(p);
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

struct PremiseWork {
  PremiseOutcome outcome;
  std::optional<PreferencePair> pair;
};

PremiseWork curate_one(const PlotRecord& plot, const GeneratorSet& generators,
                       std::span<const gateway::ModelEndpoint> ensemble, gateway::Gateway& gateway,
                       const SelectionOptions& selection) {
  PremiseWork work;
  PremiseOutcome& out = work.outcome;
  out.plot_id = plot.id;
  out.premise_id = "premise-" + plot.id;

  Premise premise;
  try {
    premise = generate_premise(plot, generators.premise, gateway);
  } catch (const TransportError& e) {
    out.reason = RejectionReason::PremiseFailed;
    out.detail = e.what();
    return work;
  } catch (const ExtractionError& e) {
    out.reason = RejectionReason::PremiseFailed;
    out.detail = e.what();
    return work;
  }

  out.premise = premise;
  CandidateSet set;
  set.premise = premise;
  set.base_id = generators.base.endpoint.model_id;
  set.prompt = generation::render_generation_prompt(generators.base.prompt_template, premise);

  std::vector<const generation::GenerationConfig*> configs{&generators.base};
  for (const auto& f : generators.frontier) {
    configs.push_back(&f);
    set.frontier_ids.insert(f.endpoint.model_id);
  }
  for (const auto* config : configs) {
    try {
      PlotRecord rec = generation::generate_plot(premise, *config, gateway);
      rec.source_label = SourceLabel::Candidate;
      set.candidates.push_back({config->endpoint.model_id, std::move(rec), 0.0, std::nullopt});
    } catch (const TransportError& e) {
      out.gaps.push_back({premise.id, config->endpoint.model_id, e.what()});
    }
  }
  const bool has_base = std::any_of(set.candidates.begin(), set.candidates.end(),
                                    [&](const Candidate& c) { return c.generator_id == set.base_id; });
  if (!has_base) {
    out.reason = RejectionReason::BaseMissing;
    out.detail = "base generator " + set.base_id + " produced no plot";
    return work;
  }

  for (auto& c : set.candidates) {
    try {
      c.reward = aspects::score_plot(c.plot, ensemble, gateway);
      c.overall = c.reward->overall;
      out.scores.emplace_back(c.generator_id, c.overall);
    } catch (const RatingUnavailableError& e) {
      out.reason = RejectionReason::ScoringFailed;
      out.detail = e.what();
      return work;
    } catch (const DomainError& e) {
      out.reason = RejectionReason::ScoringFailed;
      out.detail = e.what();
      return work;
    }
  }

  Selection sel = select_preference_pair(set, selection);
  out.reason = sel.reason;
  work.pair = std::move(sel.pair);
  return work;
}

}  // namespace

CurationResult curate(std::span<const PlotRecord> corpus, const GeneratorSet& generators,
                      std::span<const gateway::ModelEndpoint> ensemble, gateway::Gateway& gateway,
                      const CurationOptions& options) {
  if (ensemble.empty()) throw ConfigError("curation needs a non-empty rating ensemble");
  generators.premise.validate();
  generators.base.validate();
  if (generators.frontier.empty()) throw ConfigError("curation needs at least one frontier generator");
  for (const auto& f : generators.frontier) {
    f.validate();
    if (f.endpoint.model_id == generators.base.endpoint.model_id)
      throw ConfigError("base generator " + f.endpoint.model_id + " is also listed as frontier");
  }

  std::vector<PremiseWork> work(corpus.size());
  parallel_for(corpus.size(), options.jobs, [&](std::size_t i) {
    work[i] = curate_one(corpus[i], generators, ensemble, gateway, options.selection);
  });

  std::vector<std::size_t> order(work.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return work[a].outcome.premise_id < work[b].outcome.premise_id;
  });

  CurationResult result;
  result.report.premises = corpus.size();
  for (RejectionReason r : kAllReasons) result.report.rejections[r] = 0;
  for (std::size_t i : order) {
    if (work[i].pair) result.pairs.push_back(std::move(*work[i].pair));
    if (work[i].outcome.reason) ++result.report.rejections[*work[i].outcome.reason];
    result.report.outcomes.push_back(std::move(work[i].outcome));
  }
  result.report.pairs = result.pairs.size();
  return result;
}

json to_json(const CurationReport& r) {
  json j;
  j["premises"] = r.premises;
  j["pairs"] = r.pairs;
  json rej = json::object();
  for (const auto& [reason, n] : r.rejections) rej[std::string(to_string(reason))] = n;
  j["rejections"] = std::move(rej);
  json outcomes = json::array();
  for (const auto& o : r.outcomes) {
    json oj;
    oj["plot_id"] = o.plot_id;
    oj["premise_id"] = o.premise_id;
    oj["result"] = o.reason ? std::string(to_string(*o.reason)) : std::string("pair");
    if (!o.detail.empty()) oj["detail"] = o.detail;
    json scores = json::object();
    for (const auto& [g, s] : o.scores) scores[g] = s;
    oj["scores"] = std::move(scores);
    if (!o.gaps.empty()) {
      json gaps = json::array();
      for (const auto& g : o.gaps) gaps.push_back({{"generator_id", g.generator_id}, {"error", g.error}});
      oj["gaps"] = std::move(gaps);
    }
    outcomes.push_back(std::move(oj));
  }
  j["outcomes"] = std::move(outcomes);
  return j;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

fs::path sidecar_path(const fs::path& jsonl) {
  fs::path out = jsonl;
  out.replace_filename(jsonl.stem().string() + ".manifest.json");
  return out;
}

json to_json(const PreferencePair& p) {
  json j;
  j["premise_id"] = p.premise_id;
  j["premise"] = p.premise_text;
  j["chosen_score"] = p.chosen_score;
  j["rejected_score"] = p.rejected_score;
  j["runner_up_score"] = p.runner_up_score;
  j["margin"] = p.margin;
  j["audit"] = {{"winner", p.audit.winner_id},
                {"runner_up", p.audit.runner_up_id},
                {"rejected", p.audit.rejected_id},
                {"threshold", p.audit.threshold},
                {"margin_required", p.audit.margin_required},
                {"rejected_policy", std::string(to_string(p.audit.policy))}};
  return j;
}

void export_dpo(std::span<const PreferencePair> pairs, const fs::path& path, const ExportMeta& meta) {
  std::vector<json> lines;
  json entries = json::array();
  for (const auto& p : pairs) {
    lines.push_back({{"prompt", p.prompt}, {"chosen", p.chosen_text}, {"rejected", p.rejected_text}});
    entries.push_back(to_json(p));
  }
  json manifest;
  manifest["dataset"] = path.filename().string();
  manifest["count"] = pairs.size();
  manifest["config_hash"] = meta.config_hash;
  manifest["seed"] = meta.seed;
  manifest["threshold"] = meta.selection.threshold;
  manifest["margin"] = meta.selection.margin;
  manifest["rejected_policy"] = std::string(to_string(meta.selection.policy));
  manifest["pairs"] = std::move(entries);
  jsonl::write(path, lines);
  jsonl::write_text(sidecar_path(path), jsonl::pretty(manifest));
}

std::vector<PreferencePair> import_dpo(const fs::path& path) {
  const auto lines = jsonl::read(path);
  const json manifest = json::parse(jsonl::read_text(sidecar_path(path)), nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("pairs"))
    throw LoadError(sidecar_path(path).string() + ": malformed DPO manifest");
  const json& entries = manifest["pairs"];
  if (entries.size() != lines.size())
    throw LoadError(path.string() + ": " + std::to_string(lines.size()) + " lines but manifest lists " +
                    std::to_string(entries.size()) + " pairs");
  std::vector<PreferencePair> out;
  try {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const json& l = lines[i];
      const json& e = entries[i];
      if (l.size() != 3) throw LoadError(path.string() + ": line " + std::to_string(i + 1) + " must have exactly 3 keys");
      PreferencePair p;
      p.prompt = l.at("prompt").get<std::string>();
      p.chosen_text = l.at("chosen").get<std::string>();
      p.rejected_text = l.at("rejected").get<std::string>();
      p.premise_id = e.at("premise_id").get<std::string>();
      p.premise_text = e.at("premise").get<std::string>();
      p.chosen_score = e.at("chosen_score").get<double>();
      p.rejected_score = e.at("rejected_score").get<double>();
      p.runner_up_score = e.at("runner_up_score").get<double>();
      p.margin = e.at("margin").get<double>();
      const json& a = e.at("audit");
      p.audit.winner_id = a.at("winner").get<std::string>();
      p.audit.runner_up_id = a.at("runner_up").get<std::string>();
      p.audit.rejected_id = a.at("rejected").get<std::string>();
      p.audit.threshold = a.at("threshold").get<double>();
      p.audit.margin_required = a.at("margin_required").get<double>();
      p.audit.policy = rejected_policy_from_string(a.at("rejected_policy").get<std::string>());
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace plottwist::curation
