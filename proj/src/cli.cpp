#include "plottwist/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "plottwist/aspects.hpp"
#include "plottwist/config.hpp"
#include "plottwist/curation.hpp"
#include "plottwist/errors.hpp"
#include "plottwist/generation.hpp"
#include "plottwist/judge.hpp"
#include "plottwist/jsonl.hpp"
#include "plottwist/manifest.hpp"
#include "plottwist/parallel.hpp"
#include "plottwist/report.hpp"
#include "plottwist/stats.hpp"
#include "plottwist/stratified.hpp"
#include "plottwist/validation.hpp"

namespace plottwist::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string cache_dir;
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

gateway::Gateway make_gateway(const Globals& g) {
  gateway::GatewayOptions opts;
  if (!g.cache_dir.empty()) opts.cache_dir = fs::path(g.cache_dir);
  return gateway::Gateway(std::move(opts));
}

RunManifest begin(const std::string& stage, const Globals& g) {
  RunManifest m;
  m.stage = stage;
  m.seed = g.seed;
  m.started_at = utc_timestamp();
  m.parameters["jobs"] = g.jobs;
  return m;
}

void finish(RunManifest& m, const config::ConfigSet& set, const fs::path& out_dir) {
  m.config_hash = set.hash();
  m.finished_at = utc_timestamp();
  m.write(out_dir);
}

void require_nonempty_texts(std::span<const PlotRecord> plots) {
  std::vector<std::string> empty;
  for (const auto& p : plots)
    if (p.text.empty()) empty.push_back(p.id);
  if (empty.empty()) return;
  std::string ids;
  for (const auto& id : empty) ids += (ids.empty() ? "" : ", ") + id;
  throw DomainError("zero-length plot text in record(s): " + ids);
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string input;
  std::string out;
  std::size_t max_words = 4000;
  std::string label;
};

int cmd_ingest(const IngestArgs& a, const Globals& g, Io io) {
  RunManifest m = begin("ingest", g);
  config::ConfigSet set;
  set.add("parameters", {{"max_words", a.max_words}, {"label", a.label}});
  auto corpus = load_corpus(a.input);
  if (!a.label.empty()) {
    const SourceLabel label = source_label_from_string(a.label);
    for (auto& p : corpus) p.source_label = label;
  }
  const auto kept = filter_by_length(corpus, a.max_words);
  const fs::path dir(a.out);
  save_corpus(dir / "corpus.jsonl", kept);
  m.add_input(a.input);
  m.add_output(dir / "corpus.jsonl");
  m.parameters["max_words"] = a.max_words;
  m.parameters["records_in"] = corpus.size();
  m.parameters["records_kept"] = kept.size();
  finish(m, set, dir);
  io.out << "ingest: kept " << kept.size() << " of " << corpus.size() << " records (max "
         << a.max_words << " words)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// rate
// ---------------------------------------------------------------------------

struct RateArgs {
  std::string corpus;
  std::string ensemble;
  std::string out;
};

int cmd_rate(const RateArgs& a, const Globals& g, Io io) {
  RunManifest m = begin("rate", g);
  config::ConfigSet set;
  auto ensemble = config::load_ensemble(a.ensemble, set);
  for (auto& e : ensemble) config::assign_seed(e, g.seed, "rate");
  const auto corpus = load_corpus(a.corpus);
  require_nonempty_texts(corpus);

  auto gw = make_gateway(g);
  std::vector<std::optional<aspects::PlotReward>> rewards(corpus.size());
  std::vector<std::string> errors(corpus.size());
  parallel_for(corpus.size(), g.jobs, [&](std::size_t i) {
    try {
      rewards[i] = aspects::score_plot(corpus[i], ensemble, gw);
    } catch (const RatingUnavailableError& e) {
      errors[i] = e.what();
    }
  });

  std::vector<json> rows, failures;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (rewards[i]) rows.push_back(aspects::to_json(*rewards[i]));
    else failures.push_back({{"plot_id", corpus[i].id}, {"error", errors[i]}});
  }
  const fs::path dir(a.out);
  jsonl::write(dir / "ratings.jsonl", rows);
  jsonl::write(dir / "rating_failures.jsonl", failures);
  m.add_input(a.corpus);
  m.add_input(a.ensemble);
  m.add_output(dir / "ratings.jsonl");
  m.add_output(dir / "rating_failures.jsonl");
  finish(m, set, dir);
  io.out << "rate: " << rows.size() << " rated, " << failures.size() << " unavailable\n";
  return 0;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string premises;
  std::string models;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, const Globals& g, Io io) {
  RunManifest m = begin("generate", g);
  config::ConfigSet set;
  auto configs = config::load_models(a.models, set);
  for (auto& c : configs) config::assign_seed(c.endpoint, g.seed, "generate");
  const auto premises = load_premises(a.premises);

  auto gw = make_gateway(g);
  const auto batch = generation::generate_batch(premises, configs, gw, g.jobs);
  const auto records = batch.records();
  std::vector<json> gaps;
  for (const auto& gap : batch.gaps)
    gaps.push_back({{"premise_id", gap.premise_id}, {"generator_id", gap.generator_id}, {"error", gap.error}});

  const fs::path dir(a.out);
  save_corpus(dir / "plots.jsonl", records);
  jsonl::write(dir / "gaps.jsonl", gaps);
  m.add_input(a.premises);
  m.add_input(a.models);
  m.add_output(dir / "plots.jsonl");
  m.add_output(dir / "gaps.jsonl");
  finish(m, set, dir);
  io.out << "generate: " << records.size() << " plots, " << gaps.size() << " gaps\n";
  return 0;
}

// ---------------------------------------------------------------------------
// curate
// ---------------------------------------------------------------------------

struct CurateArgs {
  std::string corpus;
  std::string generators;
  std::string ensemble;
  std::string out;
  double threshold = 8.0;
  double margin = 0.5;
  std::string rejected_policy = "base";
};

int cmd_curate(const CurateArgs& a, const Globals& g, Io io) {
  RunManifest m = begin("curate", g);
  config::ConfigSet set;
  auto generators = config::load_generators(a.generators, set);
  auto ensemble = config::load_ensemble(a.ensemble, set);
  config::assign_seed(generators.premise, g.seed, "curate/premise");
  config::assign_seed(generators.base.endpoint, g.seed, "curate/generate");
  for (auto& f : generators.frontier) config::assign_seed(f.endpoint, g.seed, "curate/generate");
  for (auto& e : ensemble) config::assign_seed(e, g.seed, "curate/rate");

  curation::CurationOptions opts;
  opts.selection.threshold = a.threshold;
  opts.selection.margin = a.margin;
  opts.selection.policy = curation::rejected_policy_from_string(a.rejected_policy);
  opts.jobs = g.jobs;
  set.add("selection", {{"threshold", a.threshold}, {"margin", a.margin}, {"rejected_policy", a.rejected_policy}});

  const auto corpus = load_corpus(a.corpus);
  require_nonempty_texts(corpus);
  auto gw = make_gateway(g);
  const auto result = curation::curate(corpus, generators, ensemble, gw, opts);

  const fs::path dir(a.out);
  std::vector<Premise> premises;
  for (const auto& o : result.report.outcomes)
    if (o.premise) premises.push_back(*o.premise);
  save_premises(dir / "premises.jsonl", premises);
  curation::export_dpo(result.pairs, dir / "dpo.jsonl", {set.hash(), g.seed, opts.selection});
  jsonl::write_text(dir / "curation_report.json", jsonl::pretty(curation::to_json(result.report)));

  m.add_input(a.corpus);
  m.add_input(a.generators);
  m.add_input(a.ensemble);
  for (const char* f : {"premises.jsonl", "dpo.jsonl", "dpo.manifest.json", "curation_report.json"})
    m.add_output(dir / f);
  finish(m, set, dir);

  io.out << "curate: " << result.pairs.size() << " pairs from " << result.report.premises << " premises";
  for (const auto& [reason, n] : result.report.rejections)
    if (n) io.out << ", " << curation::to_string(reason) << "=" << n;
  io.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// judge
// ---------------------------------------------------------------------------

struct JudgeArgs {
  std::string plots;
  std::string judge;
  std::string out;
};

int cmd_judge(const JudgeArgs& a, const Globals& g, Io io) {
  RunManifest m = begin("judge", g);
  config::ConfigSet set;
  auto endpoint = config::load_judge(a.judge, set);
  config::assign_seed(endpoint, g.seed, "judge");
  const auto plots = load_corpus(a.plots);
  require_nonempty_texts(plots);

  auto gw = make_gateway(g);
  const auto result = judge::judge_corpus(plots, endpoint, gw, g.jobs);

  std::vector<json> rows, failures;
  for (const auto& v : result.verdicts) rows.push_back(judge::to_json(v));
  for (const auto& f : result.failures) failures.push_back({{"plot_id", f.plot_id}, {"error", f.error}});
  const fs::path dir(a.out);
  jsonl::write(dir / "verdicts.jsonl", rows);
  jsonl::write(dir / "judge_failures.jsonl", failures);
  jsonl::write_text(dir / "summary.csv", report::summary_csv_table(result.summary).to_csv());
  jsonl::write_text(dir / "summary.txt", report::summary_table(result.summary).to_text());

  m.add_input(a.plots);
  m.add_input(a.judge);
  for (const char* f : {"verdicts.jsonl", "judge_failures.jsonl", "summary.csv", "summary.txt"})
    m.add_output(dir / f);
  finish(m, set, dir);
  io.out << report::summary_table(result.summary).to_text();
  io.out << "judge: " << rows.size() << " verdicts, " << failures.size() << " incomplete\n";
  return 0;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string high;
  std::string low;
  std::string high_label = "high";
  std::string low_label = "low";
  std::size_t runs = 1000;
  std::string out = ".";
};

int cmd_validate(const ValidateArgs& a, const Globals& g, Io io) {
  RunManifest m = begin("validate", g);
  config::ConfigSet set;
  set.add("parameters", {{"runs", a.runs}, {"high_label", a.high_label}, {"low_label", a.low_label}});
  const auto high = stats::load_scored(a.high, a.high_label);
  const auto low = stats::load_scored(a.low, a.low_label);
  const auto rep = stats::validate_groups(high, low, a.runs, g.seed);
  const json j = stats::to_json(rep);
  const auto table = report::validation_table(j);

  const fs::path dir(a.out);
  jsonl::write_text(dir / "validation.json", jsonl::pretty(j));
  jsonl::write_text(dir / "validation.txt", table.to_text());
  m.add_input(a.high);
  m.add_input(a.low);
  m.add_output(dir / "validation.json");
  m.add_output(dir / "validation.txt");
  m.parameters["runs"] = a.runs;
  finish(m, set, dir);
  io.out << table.to_text();
  return 0;
}

// ---------------------------------------------------------------------------
// stratify
// ---------------------------------------------------------------------------

struct StratifyArgs {
  std::string originals;
  std::string generated;
  std::vector<std::string> verdicts;
  std::size_t resamples = 2000;
  bool allow_unpaired = false;
  std::string out;
};

int cmd_stratify(const StratifyArgs& a, const Globals& g, Io io) {
  RunManifest m = begin("stratify", g);
  config::ConfigSet set;
  set.add("parameters", {{"resamples", a.resamples}, {"allow_unpaired", a.allow_unpaired}});

  std::map<std::string, judge::JudgeVerdict> verdicts;
  for (const auto& path : a.verdicts) {
    for (const json& j : jsonl::read(path)) {
      auto v = judge::verdict_from_json(j);
      const std::string id = v.plot_id;
      if (!verdicts.emplace(id, std::move(v)).second) throw LoadError("duplicate verdict for " + id);
    }
    m.add_input(path);
  }
  auto attach = [&](const std::vector<PlotRecord>& plots, std::vector<std::string>& missing) {
    std::vector<stats::ScoredPlot> out;
    for (const auto& p : plots) {
      auto it = verdicts.find(p.id);
      if (it == verdicts.end()) missing.push_back(p.id);
      else out.emplace_back(p, it->second);
    }
    return out;
  };

  std::vector<std::string> missing;
  auto originals = attach(load_corpus(a.originals), missing);
  auto generated = attach(load_corpus(a.generated), missing);
  if (!missing.empty()) {
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    if (!a.allow_unpaired) throw PairingError("plots without verdicts: " + ids);
    io.err << "stratify: skipping plots without verdicts: " << ids << "\n";
  }

  if (a.allow_unpaired) {
    std::set<std::string> orig_ids, sources;
    for (const auto& o : originals) orig_ids.insert(o.first.id);
    for (const auto& gp : generated)
      if (gp.first.source_plot_id) sources.insert(*gp.first.source_plot_id);
    std::vector<std::string> dropped;
    std::erase_if(originals, [&](const stats::ScoredPlot& o) {
      const bool drop = !sources.count(o.first.id);
      if (drop) dropped.push_back(o.first.id);
      return drop;
    });
    std::erase_if(generated, [&](const stats::ScoredPlot& gp) {
      const bool drop = !gp.first.source_plot_id || !orig_ids.count(*gp.first.source_plot_id);
      if (drop) dropped.push_back(gp.first.id);
      return drop;
    });
    if (!dropped.empty()) {
      std::string ids;
      for (const auto& id : dropped) ids += (ids.empty() ? "" : ", ") + id;
      io.err << "stratify: dropping unpaired records: " << ids << "\n";
    }
  }

  stats::StratifiedOptions opts;
  opts.resamples = a.resamples;
  opts.seed = g.seed;
  const auto reports = stats::stratified_analysis(originals, generated, opts);
  json j = json::array();
  for (const auto& r : reports) j.push_back(stats::to_json(r));
  const auto table = report::stratified_table(j);

  const fs::path dir(a.out);
  jsonl::write_text(dir / "stratified.json", jsonl::pretty(j));
  jsonl::write_text(dir / "stratified.txt", table.to_text());
  m.add_input(a.originals);
  m.add_input(a.generated);
  m.add_output(dir / "stratified.json");
  m.add_output(dir / "stratified.txt");
  finish(m, set, dir);
  io.out << table.to_text();
  return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

judge::SummaryRow rating_summary(const stats::ScoredSet& s) {
  judge::SummaryRow row;
  row.label = s.label;
  row.n = s.size();
  auto mean_sd = [](const std::vector<double>& xs) -> std::pair<double, double> {
    return {stats::mean(xs), xs.size() > 1 ? std::sqrt(stats::sample_variance(xs)) : 0.0};
  };
  for (Aspect a : kAllAspects) {
    std::vector<double> xs;
    for (const auto& r : s.aspects) xs.push_back(r[index_of(a)]);
    std::tie(row.mean[index_of(a)], row.sd[index_of(a)]) = mean_sd(xs);
  }
  std::tie(row.overall_mean, row.overall_sd) = mean_sd(s.overall);
  return row;
}

int cmd_report(const std::string& run_dir, Io io) {
  const fs::path dir(run_dir);
  if (!fs::is_directory(dir)) throw DomainError("run directory " + run_dir + " does not exist");

  std::string text;
  auto section = [&](const std::string& title, const report::Table& t, const std::string& csv_name) {
    text += (text.empty() ? "" : "\n") + title + "\n\n" + t.to_text();
    jsonl::write_text(dir / csv_name, t.to_csv());
  };

  if (fs::exists(dir / "verdicts.jsonl")) {
    std::vector<judge::JudgeVerdict> vs;
    for (const json& j : jsonl::read(dir / "verdicts.jsonl")) vs.push_back(judge::verdict_from_json(j));
    if (!vs.empty()) section("Judge scores (mean ± SD)", report::summary_table(judge::summarize(vs)), "report_verdicts.csv");
  }
  if (fs::exists(dir / "ratings.jsonl") && !jsonl::read(dir / "ratings.jsonl").empty()) {
    const auto s = stats::load_scored(dir / "ratings.jsonl", "ratings");
    const std::vector<judge::SummaryRow> rows{rating_summary(s)};
    section("Reward ratings (mean ± SD)", report::summary_table(rows), "report_ratings.csv");
  }
  if (fs::exists(dir / "validation.json"))
    section("Group validation", report::validation_table(config::read_json_file(dir / "validation.json")),
            "report_validation.csv");
  if (fs::exists(dir / "stratified.json"))
    section("Stratified comparison", report::stratified_table(config::read_json_file(dir / "stratified.json")),
            "report_stratified.csv");

  if (text.empty()) throw DomainError("nothing to report in " + run_dir + " (no verdicts, ratings, validation or stratified output)");
  jsonl::write_text(dir / "report.txt", text);
  io.out << text;
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plot generation, rating, curation and evaluation pipeline", "plottwist"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--jobs", g.jobs, "Worker threads within a stage")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Top-level seed for every random stream");
  app.add_option("--cache-dir", g.cache_dir, "Persistent completion cache");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load, validate and length-filter a plot corpus");
  c_ingest->add_option("--input", ingest.input, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.out, "Output directory")->required();
  c_ingest->add_option("--max-words", ingest.max_words, "Drop plots longer than this")->check(CLI::PositiveNumber);
  c_ingest->add_option("--label", ingest.label, "Override every record's source_label");

  RateArgs rate;
  auto* c_rate = app.add_subcommand("rate", "Score plots with the positive/negative rating ensemble");
  c_rate->add_option("--corpus", rate.corpus, "Plots JSONL")->required()->check(CLI::ExistingFile);
  c_rate->add_option("--ensemble", rate.ensemble, "Ensemble config")->required()->check(CLI::ExistingFile);
  c_rate->add_option("--out", rate.out, "Output directory")->required();

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Generate plots for every premise with every model");
  c_gen->add_option("--premises", gen.premises, "Premises JSONL")->required()->check(CLI::ExistingFile);
  c_gen->add_option("--models", gen.models, "Models config")->required()->check(CLI::ExistingFile);
  c_gen->add_option("--out", gen.out, "Output directory")->required();

  CurateArgs cur;
  auto* c_cur = app.add_subcommand("curate", "Build DPO preference pairs");
  c_cur->add_option("--corpus", cur.corpus, "Plots JSONL")->required()->check(CLI::ExistingFile);
  c_cur->add_option("--generators", cur.generators, "Generators config")->required()->check(CLI::ExistingFile);
  c_cur->add_option("--ensemble", cur.ensemble, "Ensemble config")->required()->check(CLI::ExistingFile);
  c_cur->add_option("--out", cur.out, "Output directory")->required();
  c_cur->add_option("--threshold", cur.threshold, "Chosen score must exceed this");
  c_cur->add_option("--margin", cur.margin, "Minimum lead over the runner-up");
  c_cur->add_option("--rejected-policy", cur.rejected_policy, "base or runner_up")
      ->check(CLI::IsMember({"base", "runner_up"}));

  JudgeArgs jud;
  auto* c_jud = app.add_subcommand("judge", "Rubric evaluation of plots");
  c_jud->add_option("--plots", jud.plots, "Plots JSONL")->required()->check(CLI::ExistingFile);
  c_jud->add_option("--judge", jud.judge, "Judge endpoint config")->required()->check(CLI::ExistingFile);
  c_jud->add_option("--out", jud.out, "Output directory")->required();

  ValidateArgs val;
  auto* c_val = app.add_subcommand("validate", "Balanced subsampling comparison of two scored groups");
  c_val->add_option("--high", val.high, "Ratings or verdicts JSONL of the stronger group")->required()->check(CLI::ExistingFile);
  c_val->add_option("--low", val.low, "Ratings or verdicts JSONL of the weaker group")->required()->check(CLI::ExistingFile);
  c_val->add_option("--runs", val.runs, "Subsampling runs")->check(CLI::PositiveNumber);
  c_val->add_option("--high-label", val.high_label);
  c_val->add_option("--low-label", val.low_label);
  c_val->add_option("--out", val.out, "Output directory");

  StratifyArgs str;
  auto* c_str = app.add_subcommand("stratify", "Original vs generated comparison per quality stratum");
  c_str->add_option("--originals", str.originals, "Original plots JSONL (with external_rating)")->required()->check(CLI::ExistingFile);
  c_str->add_option("--generated", str.generated, "Generated plots JSONL (with source_plot_id)")->required()->check(CLI::ExistingFile);
  c_str->add_option("--verdicts", str.verdicts, "Verdict JSONL files covering both sets")->required()->check(CLI::ExistingFile);
  c_str->add_option("--resamples", str.resamples, "Bootstrap resamples")->check(CLI::Range(1000, 1000000));
  c_str->add_flag("--allow-unpaired", str.allow_unpaired, "Drop unpaired records instead of failing");
  c_str->add_option("--out", str.out, "Output directory")->required();

  std::string run_dir;
  auto* c_rep = app.add_subcommand("report", "Tables from a stage output directory");
  c_rep->add_option("--run", run_dir, "Run directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const Io io{out, err};
  try {
    if (*c_ingest) return cmd_ingest(ingest, g, io);
    if (*c_rate) return cmd_rate(rate, g, io);
    if (*c_gen) return cmd_generate(gen, g, io);
    if (*c_cur) return cmd_curate(cur, g, io);
    if (*c_jud) return cmd_judge(jud, g, io);
    if (*c_val) return cmd_validate(val, g, io);
    if (*c_str) return cmd_stratify(str, g, io);
    if (*c_rep) return cmd_report(run_dir, io);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ScriptGapError& e) {
    err << "configuration error (mock script): " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace plottwist::cli
