// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "plottwist/aspects.hpp"
#include "plottwist/cli.hpp"
#include "plottwist/curation.hpp"
#include "plottwist/domain.hpp"
#include "plottwist/errors.hpp"
#include "plottwist/judge.hpp"
#include "plottwist/jsonl.hpp"
#include "plottwist/losses.hpp"
#include "plottwist/rng.hpp"
#include "plottwist/stats.hpp"
#include "plottwist/stratified.hpp"

namespace fs = std::filesystem;
using namespace plottwist;

namespace {

const fs::path kSource = PLOTTWIST_SOURCE_DIR;

// A criterion stops at its first failing check.
struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Ensemble aggregation
// ---------------------------------------------------------------------------

void criterion_1() {
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const int models = 1 + static_cast<int>(rng.below(5));
    std::vector<aspects::PolarSignal> signals;
    for (int m = 0; m < models; ++m) {
      aspects::PolarSignal s;
      s.model_id = "m" + std::to_string(m);
      s.positive = static_cast<int>(rng.below(11));
      s.negative = static_cast<int>(rng.below(11));
      signals.push_back(s);
    }
    // Brute force: fold positives and negatives separately.
    int pos = 0, neg = 0;
    for (const auto& s : signals) {
      pos += s.positive;
      neg += s.negative;
    }
    const int raw = aspects::raw_sum(signals);
    require(raw == pos - neg, "raw_sum " + std::to_string(raw) + " != " + std::to_string(pos - neg));
    const double norm = aspects::normalize(raw, models);
    require(norm >= 0.0 && norm <= 10.0, "normalized outside [0,10]: " + fmt(norm));

    // Monotonicity in one score with the others held fixed.
    const std::size_t k = rng.below(static_cast<std::uint64_t>(models));
    for (bool positive : {true, false}) {
      auto bumped = signals;
      int& field = positive ? bumped[k].positive : bumped[k].negative;
      if (field == 10) continue;
      ++field;
      const double after = aspects::normalize(aspects::raw_sum(bumped), models);
      require(positive ? after >= norm : after <= norm, "normalized not monotone at trial " + std::to_string(trial));
    }
  }
}

// ---------------------------------------------------------------------------
// 2. Huber loss
// ---------------------------------------------------------------------------

void criterion_2() {
  const std::vector<std::pair<double, double>> table = {{0, 0}, {0.5, 0.125}, {1, 0.5}, {2, 1.5}};
  for (auto [r, want] : table) {
    require(losses::huber_loss(r, 1.0) == want, "huber(" + fmt(r) + ") = " + fmt(losses::huber_loss(r, 1.0)));
    require(losses::huber_loss(-r, 1.0) == want, "huber not symmetric at " + fmt(r));
  }
  // Central differences on [-3, 3] away from the knees at |r| = 1.
  const double h = 1e-6;
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const double r = -3.0 + 6.0 * (i + 0.5) / 100.0;
    if (std::abs(std::abs(r) - 1.0) < 1e-3) continue;
    const double numeric = (losses::huber_loss(r + h) - losses::huber_loss(r - h)) / (2 * h);
    const double analytic = losses::huber_derivative(r);
    require(std::abs(numeric - analytic) <= 1e-6,
            "derivative mismatch at " + fmt(r) + ": " + fmt(numeric) + " vs " + fmt(analytic));
    ++checked;
  }
  require(checked >= 98, "too few grid points checked");
}

// ---------------------------------------------------------------------------
// 3. Preference rule
// ---------------------------------------------------------------------------

// Independent statement of the rule in integer hundredths: a pair exists iff
// the top score is held by exactly one candidate, that candidate is frontier,
// it exceeds 8.00 and leads every other candidate by at least 0.50.
struct Expected {
  bool pair = false;
  std::size_t winner = 0;
  curation::RejectionReason reason{};
};

Expected brute_force(const std::vector<int>& hundredths, std::size_t base) {
  const int top = *std::max_element(hundredths.begin(), hundredths.end());
  std::vector<std::size_t> holders;
  for (std::size_t i = 0; i < hundredths.size(); ++i)
    if (hundredths[i] == top) holders.push_back(i);
  const bool frontier_holds = std::any_of(holders.begin(), holders.end(), [&](std::size_t i) { return i != base; });
  Expected e;
  if (!frontier_holds) {
    e.reason = curation::RejectionReason::BestNotFrontier;
    return e;
  }
  if (top <= 800) {
    e.reason = curation::RejectionReason::BelowThreshold;
    return e;
  }
  int second = -1;
  bool unique = holders.size() == 1;
  for (std::size_t i = 0; i < hundredths.size(); ++i)
    if (i != holders[0]) second = std::max(second, hundredths[i]);
  if (!unique || (second >= 0 && top - second < 50)) {
    e.reason = curation::RejectionReason::InsufficientMargin;
    return e;
  }
  e.pair = true;
  e.winner = holders[0];
  return e;
}

void criterion_3() {
  const std::vector<int> grid = {700, 750, 800, 805, 850, 860, 900};
  std::size_t sets = 0;
  for (std::size_t k = 1; k <= 5; ++k) {
    std::vector<std::size_t> idx(k, 0);
    while (true) {
      std::vector<int> hundredths(k);
      for (std::size_t i = 0; i < k; ++i) hundredths[i] = grid[idx[i]];
      for (std::size_t base = 0; base < k; ++base) {
        curation::CandidateSet set;
        set.premise = {"p", "a premise", std::nullopt};
        set.prompt = "prompt";
        set.base_id = "g" + std::to_string(base);
        for (std::size_t i = 0; i < k; ++i) {
          curation::Candidate c;
          c.generator_id = "g" + std::to_string(i);
          c.plot = PlotRecord::make("c" + std::to_string(i), "text of " + c.generator_id);
          c.overall = hundredths[i] / 100.0;
          set.candidates.push_back(c);
          if (i != base) set.frontier_ids.insert(c.generator_id);
        }
        const auto got = curation::select_preference_pair(set);
        const Expected want = brute_force(hundredths, base);
        std::string where = "scores";
        for (int h : hundredths) where += " " + std::to_string(h);
        where += " base g" + std::to_string(base);
        require(got.pair.has_value() == want.pair, "pair mismatch for" + where);
        if (want.pair) {
          require(got.pair->chosen_text == set.candidates[want.winner].plot.text, "wrong chosen for" + where);
          require(got.pair->rejected_text == set.candidates[base].plot.text, "wrong rejected for" + where);
        } else {
          require(got.reason == want.reason, "wrong reason for" + where);
        }
        ++sets;
      }
      std::size_t d = 0;
      while (d < k && ++idx[d] == grid.size()) idx[d++] = 0;
      if (d == k) break;
    }
  }
  require(sets == 1 * 7 + 2 * 49 + 3 * 343 + 4 * 2401 + 5 * 16807, "enumeration incomplete");
}

// ---------------------------------------------------------------------------
// 4. Welch t and Cohen's d
// ---------------------------------------------------------------------------

void near(double got, double want, double tol, const std::string& what) {
  require(std::abs(got - want) <= tol, what + ": got " + fmt(got) + ", want " + fmt(want));
}

void criterion_4() {
  const std::vector<double> a = {1, 2, 3, 4, 5}, b = {2, 4, 6, 8, 10};
  // var(a) = 2.5, var(b) = 10, n = 5: t = -3 / sqrt(2.5), dof = 6.25 / 1.0625,
  // pooled sd = sqrt(6.25) = 2.5.
  const auto w = stats::welch_t(a, b);
  near(w.t, -3.0 / std::sqrt(2.5), 1e-9, "hand t");
  near(w.dof, 100.0 / 17.0, 1e-9, "hand dof");
  near(stats::cohens_d(a, b), -1.2, 1e-9, "hand d");

  const auto oracle = json::parse(jsonl::read_text(kSource / "tests/fixtures/stats_oracle.json"));
  const auto& cases = oracle.at("cases");
  require(cases.size() == 100, "oracle fixture should hold 100 cases");
  int i = 0;
  for (const auto& c : cases) {
    const auto xa = c.at("a").get<std::vector<double>>();
    const auto xb = c.at("b").get<std::vector<double>>();
    const auto r = stats::welch_t(xa, xb);
    const std::string tag = "oracle case " + std::to_string(i++);
    near(r.t, c.at("t").get<double>(), 1e-9, tag + " t");
    near(r.dof, c.at("dof").get<double>(), 1e-9, tag + " dof");
    near(r.p, c.at("p").get<double>(), 1e-9, tag + " p");
    near(stats::cohens_d(xa, xb), c.at("d").get<double>(), 1e-9, tag + " d");
  }
}

// ---------------------------------------------------------------------------
// 5. Balanced subsampling on synthetic group scores
// ---------------------------------------------------------------------------

// Gaussian draws rescaled so the sample has exactly the requested mean and
// sample SD.
std::vector<double> standardized(std::size_t n, double mean, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  const double m = stats::mean(x);
  const double s = std::sqrt(stats::sample_variance(x));
  for (double& v : x) v = mean + sd * (v - m) / s;
  return x;
}

void criterion_5() {
  const stats::ScoredSample low{"low", standardized(37, 7.21, 0.5, 5001)};
  const stats::ScoredSample high{"high", standardized(94, 8.28, 0.5, 5002)};
  const auto r = stats::balanced_subsample_compare(low, high, 1000, 7);
  near(r.mean_diff, 1.07, 0.05, "mean diff");
  require(r.directional_consistency >= 0.99, "directional consistency " + fmt(r.directional_consistency));
  require(r.p_value && *r.p_value < 1e-6, "Welch p " + (r.p_value ? fmt(*r.p_value) : std::string("null")));
}

// ---------------------------------------------------------------------------
// 6. Paired comparison in the Low stratum
// ---------------------------------------------------------------------------

judge::JudgeVerdict verdict_with(const PlotRecord& plot, const PerAspect<double>& scores) {
  PerAspect<judge::RubricReport> reports;
  for (Aspect a : kAllAspects) {
    reports[index_of(a)].aspect = a;
    reports[index_of(a)].declared_total = scores[index_of(a)];
  }
  return judge::make_verdict(plot, reports);
}

void criterion_6() {
  Rng rng(6006);
  std::vector<stats::ScoredPlot> originals, generated;
  for (int i = 0; i < 60; ++i) {
    PlotRecord o = PlotRecord::make("o" + std::to_string(i), "original plot " + std::to_string(i));
    o.external_rating = 3.0 + 3.0 * rng.uniform();  // Low: rating <= 6
    PlotRecord g = PlotRecord::make("g" + std::to_string(i), "generated plot " + std::to_string(i),
                                    SourceLabel::Generated);
    g.generator_id = "mock-base-moe";
    g.source_plot_id = o.id;
    PerAspect<double> so{}, sg{};
    for (std::size_t a = 0; a < kAspectCount; ++a) {
      so[a] = rng.normal(5.0, 0.6);
      sg[a] = so[a] + rng.normal(2.0, 0.3);
    }
    originals.emplace_back(o, verdict_with(o, so));
    generated.emplace_back(g, verdict_with(g, sg));
  }
  stats::StratifiedOptions opts;
  opts.seed = 7;
  const auto reports = stats::stratified_analysis(originals, generated, opts);
  const auto low = std::find_if(reports.begin(), reports.end(),
                                [](const auto& r) { return r.stratum == QualityStratum::Low; });
  require(low != reports.end() && low->n == 60, "Low stratum should hold all 60 pairs");

  auto check = [](const std::string& name, const std::optional<stats::ComparisonResult>& c,
                  const std::optional<double>& dom) {
    require(c.has_value() && dom.has_value(), name + " missing");
    require(c->mean_diff >= 1.9 && c->mean_diff <= 2.1, name + " mean diff " + fmt(c->mean_diff));
    require(*dom >= 0.95, name + " dominance " + fmt(*dom));
    require(c->ci && c->ci->low > 0.0, name + " CI includes 0");
  };
  for (Aspect a : kAllAspects)
    check(std::string(field_name(a)), low->per_aspect[index_of(a)], low->dominance[index_of(a)]);
  check("overall", low->overall, low->overall_dominance);
}

// ---------------------------------------------------------------------------
// 7. Rubric reports
// ---------------------------------------------------------------------------

judge::RubricReport random_report(Rng& rng) {
  judge::RubricReport r;
  r.aspect = kAllAspects[rng.below(kAspectCount)];
  int tenths = 0;
  for (double& s : r.criterion_scores) {
    const int k = static_cast<int>(rng.below(11));
    s = k / 10.0;
    tenths += k;
  }
  r.declared_total = tenths / 10.0;
  return r;
}

std::string replace_line(const std::string& text, std::size_t line, const std::string& with) {
  std::istringstream in(text);
  std::string out, l;
  for (std::size_t i = 0; std::getline(in, l); ++i) {
    if (i == line) {
      if (!with.empty()) out += with + "\n";
    } else {
      out += l + "\n";
    }
  }
  return out;
}

void criterion_7() {
  Rng rng(7007);
  for (int i = 0; i < 1000; ++i) {
    judge::RubricReport r = random_report(rng);
    r.raw_text = judge::format_rubric_report(r);
    const auto parsed = judge::parse_rubric_report(r.raw_text, judge::rubric(r.aspect));
    require(parsed == r, "round trip changed report " + std::to_string(i));
    require(judge::format_rubric_report(parsed) == r.raw_text, "re-serialization differs " + std::to_string(i));
  }

  using Kind = judge::RubricError::Kind;
  std::map<std::string, int> rejected;
  for (int i = 0; i < 200; ++i) {
    judge::RubricReport r = random_report(rng);
    const auto& spec = judge::rubric(r.aspect);
    std::string text = judge::format_rubric_report(r);
    Kind want{};
    std::string kind;
    const std::size_t c = rng.below(judge::kCriteria);
    switch (i % 3) {
      case 0: {  // off-grid criterion score
        static const char* kOffGrid[] = {"0.25", "0.33", "0.75", "0.05", "0.95", "0.55"};
        text = replace_line(text, c,
                            std::to_string(c + 1) + ". " + std::string(spec.criteria[c]) + ": " +
                                kOffGrid[rng.below(6)]);
        want = Kind::Grid;
        kind = "off-grid";
        break;
      }
      case 1: {  // TOTAL further than 0.05 from the criteria sum
        const int shift = 1 + static_cast<int>(rng.below(20));
        int total = static_cast<int>(std::lround(r.declared_total * 10));
        total = total + shift <= 100 ? total + shift : total - shift;
        char buf[32];
        std::snprintf(buf, sizeof buf, "TOTAL: %d.%d/10", total / 10, total % 10);
        text = replace_line(text, judge::kCriteria, buf);
        want = Kind::Consistency;
        kind = "total-mismatch";
        break;
      }
      default: {  // a criterion or the TOTAL line is missing
        const std::size_t line = rng.below(judge::kCriteria + 1);
        text = replace_line(text, line, "");
        want = Kind::Parse;
        kind = "missing-line";
        break;
      }
    }
    try {
      judge::parse_rubric_report(text, spec);
      throw Failure{kind + " report " + std::to_string(i) + " was accepted"};
    } catch (const judge::RubricError& e) {
      require(e.kind() == want, kind + " report " + std::to_string(i) + " rejected as the wrong kind: " + e.what());
      ++rejected[kind];
    }
  }
  require(rejected.size() == 3, "every perturbation family should be exercised");
}

// ---------------------------------------------------------------------------
// 8 and 9. Bundled mock scenario
// ---------------------------------------------------------------------------

const fs::path kScenario = kSource / "scenarios/mock";

struct ScenarioRun {
  fs::path dir;
};

void cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  std::string joined;
  for (const auto& a : args) joined += " " + a;
  require(code == 0, "plottwist" + joined + " exited " + std::to_string(code) + ": " + err.str());
}

// ingest, rate both groups and the corpus, curate, judge, validate.
fs::path run_scenario(const fs::path& dir) {
  fs::remove_all(dir);
  const std::string s = kScenario.string(), d = dir.string();
  const std::vector<std::string> g = {"--seed", "7", "--cache-dir", d + "/cache"};
  auto with = [&](std::vector<std::string> rest) {
    std::vector<std::string> all = g;
    all.insert(all.end(), rest.begin(), rest.end());
    return all;
  };
  cli(with({"ingest", "--input", s + "/corpus.jsonl", "--out", d + "/ingest"}));
  cli(with({"rate", "--corpus", d + "/ingest/corpus.jsonl", "--ensemble", s + "/ensemble.json", "--out", d + "/rate"}));
  cli(with({"rate", "--corpus", s + "/gsat.jsonl", "--ensemble", s + "/ensemble.json", "--out", d + "/rate-gsat"}));
  cli(with({"rate", "--corpus", s + "/razzie.jsonl", "--ensemble", s + "/ensemble.json", "--out", d + "/rate-razzie"}));
  cli(with({"curate", "--corpus", d + "/ingest/corpus.jsonl", "--generators", s + "/generators.json", "--ensemble",
            s + "/ensemble.json", "--out", d + "/curate"}));
  cli(with({"judge", "--plots", d + "/ingest/corpus.jsonl", "--judge", s + "/judge.json", "--out", d + "/judge"}));
  cli(with({"validate", "--high", d + "/rate-gsat/ratings.jsonl", "--low", d + "/rate-razzie/ratings.jsonl",
            "--high-label", "GSAT", "--low-label", "Razzie", "--runs", "1000", "--out", d + "/validate"}));
  return dir;
}

const std::vector<std::string> kCompared = {
    "rate/ratings.jsonl",     "rate-gsat/ratings.jsonl", "rate-razzie/ratings.jsonl",
    "curate/dpo.jsonl",       "curate/dpo.manifest.json", "judge/verdicts.jsonl",
    "validate/validation.json"};

fs::path scenario_root() { return fs::temp_directory_path() / ("plottwist-acceptance-" + std::to_string(::getpid())); }

void criterion_8() {
  const fs::path a = run_scenario(scenario_root() / "a");
  const fs::path b = run_scenario(scenario_root() / "b");
  for (const auto& f : kCompared) {
    const std::string x = jsonl::read_text(a / f), y = jsonl::read_text(b / f);
    require(!x.empty(), f + " is empty");
    require(x == y, f + " differs between runs");
  }
}

void criterion_9() {
  const fs::path dir = scenario_root() / "a";
  if (!fs::exists(dir / "curate/dpo.jsonl")) run_scenario(dir);
  const auto expected = json::parse(jsonl::read_text(kScenario / "expected.json"));
  const auto pairs = curation::import_dpo(dir / "curate/dpo.jsonl");
  const auto want = expected.at("pairs").get<std::size_t>();
  require(pairs.size() == want, std::to_string(pairs.size()) + " pairs, scripted " + std::to_string(want));
  for (const auto& p : pairs) {
    require(p.chosen_score > 8.0, p.premise_id + " chosen " + fmt(p.chosen_score));
    // The margin rule compares within kScoreTolerance so that decimal ties hold.
    require(p.chosen_score - p.runner_up_score >= 0.5 - curation::kScoreTolerance,
            p.premise_id + " margin " + fmt(p.chosen_score - p.runner_up_score));
    require(p.chosen_score > p.rejected_score, p.premise_id + " chosen not above rejected");
  }
  const auto report = json::parse(jsonl::read_text(dir / "curate/curation_report.json"));
  for (const auto& o : report.at("outcomes")) {
    const auto id = o.at("plot_id").get<std::string>();
    const auto result = o.at("result").get<std::string>();
    require(expected.at("outcomes").at(id) == result, id + " ended as " + result);
  }
  for (const auto& [reason, n] : expected.at("rejections").items())
    require(report.at("rejections").value(reason, 0) == n.get<int>(), "rejection count for " + reason);
}

}  // namespace

int main() {
  const std::vector<std::tuple<int, std::string, double, std::function<void()>>> criteria = {
      {1, "ensemble raw_sum and normalization oracle", 1.0, criterion_1},
      {2, "Huber loss values and derivative", 1.0, criterion_2},
      {3, "preference rule exhaustive equivalence", 10.0, criterion_3},
      {4, "Welch t and Cohen's d oracle", 5.0, criterion_4},
      {5, "balanced subsampling on synthetic groups", 10.0, criterion_5},
      {6, "paired Low-stratum comparison", 10.0, criterion_6},
      {7, "rubric report round trip and rejection", 5.0, criterion_7},
      {8, "mock scenario determinism", 30.0, criterion_8},
      {9, "mock scenario curation yield", 30.0, criterion_9},
  };
  int failed = 0;
  for (const auto& [n, name, budget, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string problem;
    try {
      fn();
    } catch (const Failure& f) {
      problem = f.what;
    } catch (const std::exception& e) {
      problem = std::string("unexpected exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (problem.empty() && secs > budget) problem = "took " + fmt(secs) + " s, budget " + fmt(budget) + " s";
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3fs", secs);
    std::cout << (problem.empty() ? "PASS" : "FAIL") << " " << n << " " << name << " (" << timing << ")";
    if (!problem.empty()) std::cout << ": " << problem;
    std::cout << "\n";
    if (!problem.empty()) ++failed;
  }
  fs::remove_all(scenario_root());
  return failed == 0 ? 0 : 1;
}
