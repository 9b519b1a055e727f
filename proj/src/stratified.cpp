#include "plottwist/stratified.hpp"

#include <algorithm>
#include <map>

#include "plottwist/errors.hpp"
#include "plottwist/rng.hpp"

namespace plottwist::stats {

ComparisonResult paired_compare(std::string label, std::span<const double> original,
                                std::span<const double> generated, std::size_t resamples,
                                double level, std::uint64_t seed) {
  if (original.size() != generated.size())
    throw DomainError("paired comparison needs equally long samples");
  if (original.empty()) throw DomainError("paired comparison needs at least one pair");

  std::vector<double> diffs(original.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = generated[i] - original[i];

  ComparisonResult r;
  r.label = std::move(label);
  r.n_a = generated.size();
  r.n_b = original.size();
  r.mean_a = mean(generated);
  r.mean_b = mean(original);
  r.mean_diff = mean(diffs);
  r.effect_size = "paired";
  r.directional_consistency =
      static_cast<double>(std::count_if(diffs.begin(), diffs.end(), [](double d) { return d > 0.0; })) /
      static_cast<double>(diffs.size());
  if (diffs.size() >= 2) {
    r.ci = bootstrap_ci_paired(diffs, resamples, level, seed);
    try {
      r.cohens_d = paired_cohens_d(diffs);
    } catch (const DegenerateInputError&) {
    }
    try {
      const WelchResult w = welch_t(generated, original);
      r.t_stat = w.t;
      r.dof = w.dof;
      r.p_value = w.p;
    } catch (const DegenerateInputError&) {
    }
  }
  return r;
}

namespace {

struct Pair {
  const ScoredPlot* original;
  const ScoredPlot* generated;
};

std::string join(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
  return out;
}

}  // namespace

std::vector<StratifiedReport> stratified_analysis(std::span<const ScoredPlot> originals,
                                                  std::span<const ScoredPlot> generated,
                                                  const StratifiedOptions& options) {
  std::map<std::string, const ScoredPlot*> by_id;
  std::vector<std::string> problems;
  std::vector<std::string> unrated;
  for (const auto& o : originals) {
    if (!by_id.emplace(o.first.id, &o).second) problems.push_back(o.first.id + " (duplicate original)");
    if (!o.first.external_rating) unrated.push_back(o.first.id);
  }
  if (!unrated.empty()) throw DomainError("originals without external_rating: " + join(unrated));

  std::map<std::string, const ScoredPlot*> partner;
  for (const auto& g : generated) {
    const auto& src = g.first.source_plot_id;
    if (!src || !by_id.count(*src)) {
      problems.push_back(g.first.id + " (no matching original)");
    } else if (!partner.emplace(*src, &g).second) {
      problems.push_back(g.first.id + " (second generation for " + *src + ")");
    }
  }
  for (const auto& [id, o] : by_id)
    if (!partner.count(id)) problems.push_back(id + " (no generated partner)");
  if (!problems.empty()) throw PairingError("unpaired records: " + join(problems));

  std::map<QualityStratum, std::vector<Pair>> buckets;
  for (const auto& [id, o] : by_id) buckets[stratify(*o->first.external_rating)].push_back({o, partner[id]});

  std::vector<StratifiedReport> reports;
  for (QualityStratum s : kAllStrata) {
    StratifiedReport rep;
    rep.stratum = s;
    const auto& pairs = buckets[s];
    rep.n = pairs.size();
    if (pairs.empty()) {
      reports.push_back(std::move(rep));
      continue;
    }
    const std::string sname(to_string(s));

    auto analyse = [&](const std::string& what, auto score) {
      std::vector<double> orig, gen;
      std::vector<std::pair<double, double>> dom;
      for (const auto& p : pairs) {
        orig.push_back(score(p.original->second));
        gen.push_back(score(p.generated->second));
        dom.emplace_back(orig.back(), gen.back());
      }
      const std::uint64_t seed = derive_seed(options.seed, "stratified/" + sname + "/" + what);
      auto cmp = paired_compare(sname + " " + what, orig, gen, options.resamples, options.level, seed);
      return std::make_pair(std::move(cmp), dominance_probability(dom));
    };

    for (Aspect a : kAllAspects) {
      const auto i = index_of(a);
      auto [cmp, dom] = analyse(std::string(field_name(a)),
                                [i](const judge::JudgeVerdict& v) { return v.per_aspect_score[i]; });
      rep.per_aspect[i] = std::move(cmp);
      rep.dominance[i] = dom;
    }
    auto [cmp, dom] = analyse("overall", [](const judge::JudgeVerdict& v) { return v.mean_score; });
    rep.overall = std::move(cmp);
    rep.overall_dominance = dom;
    reports.push_back(std::move(rep));
  }
  return reports;
}

json to_json(const StratifiedReport& r) {
  json j;
  j["stratum"] = std::string(to_string(r.stratum));
  j["n"] = r.n;
  json aspects = json::object();
  for (Aspect a : kAllAspects) {
    const auto i = index_of(a);
    json aj = r.per_aspect[i] ? to_json(*r.per_aspect[i]) : json(nullptr);
    if (!aj.is_null()) aj["dominance"] = *r.dominance[i];
    aspects[std::string(field_name(a))] = std::move(aj);
  }
  j["aspects"] = std::move(aspects);
  json oj = r.overall ? to_json(*r.overall) : json(nullptr);
  if (!oj.is_null()) oj["dominance"] = *r.overall_dominance;
  j["overall"] = std::move(oj);
  return j;
}

}  // namespace plottwist::stats
