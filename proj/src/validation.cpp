#include "plottwist/validation.hpp"

#include "plottwist/aspects.hpp"
#include "plottwist/errors.hpp"
#include "plottwist/judge.hpp"
#include "plottwist/jsonl.hpp"
#include "plottwist/rng.hpp"

namespace plottwist::stats {

ScoredSet load_scored(const std::filesystem::path& path, std::string label) {
  ScoredSet set;
  set.label = std::move(label);
  for (const json& j : jsonl::read(path)) {
    PerAspect<double> scores{};
    double overall = 0.0;
    std::string id;
    if (j.contains("mean_score")) {
      const auto v = judge::verdict_from_json(j);
      scores = v.per_aspect_score;
      overall = v.mean_score;
      id = v.plot_id;
    } else if (j.contains("overall")) {
      const auto r = aspects::reward_from_json(j);
      for (Aspect a : kAllAspects) scores[index_of(a)] = r.per_aspect[index_of(a)].normalized;
      overall = r.overall;
      id = r.plot_id;
    } else {
      throw LoadError(path.string() + ": record is neither a rating nor a verdict");
    }
    set.plot_ids.push_back(std::move(id));
    set.aspects.push_back(scores);
    set.overall.push_back(overall);
  }
  if (set.plot_ids.empty()) throw LoadError(path.string() + ": no scored records");
  return set;
}

ValidationReport validate_groups(const ScoredSet& high, const ScoredSet& low, std::size_t runs,
                                 std::uint64_t seed) {
  const bool high_is_majority = high.size() >= low.size();
  const ScoredSet& maj = high_is_majority ? high : low;
  const ScoredSet& min = high_is_majority ? low : high;

  ValidationReport rep;
  rep.high_label = high.label;
  rep.low_label = low.label;
  rep.majority = maj.label;
  rep.runs = runs;
  rep.seed = seed;

  auto compare = [&](const std::string& name, auto pick) {
    ScoredSample a{min.label, pick(min)};
    ScoredSample b{maj.label, pick(maj)};
    rep.rows.emplace_back(name, balanced_subsample_compare(a, b, runs, derive_seed(seed, "validate/" + name)));
  };

  for (Aspect asp : kAllAspects) {
    const auto i = index_of(asp);
    compare(std::string(field_name(asp)), [i](const ScoredSet& s) {
      std::vector<double> v;
      for (const auto& row : s.aspects) v.push_back(row[i]);
      return v;
    });
  }
  compare("overall", [](const ScoredSet& s) { return s.overall; });
  compare("pooled", [](const ScoredSet& s) {
    std::vector<double> v;
    for (const auto& row : s.aspects) v.insert(v.end(), row.begin(), row.end());
    return v;
  });
  return rep;
}

json to_json(const ValidationReport& r) {
  json j;
  j["high"] = r.high_label;
  j["low"] = r.low_label;
  j["majority"] = r.majority;
  j["runs"] = r.runs;
  j["seed"] = r.seed;
  json rows = json::object();
  for (const auto& [name, cmp] : r.rows) rows[name] = to_json(cmp);
  j["comparisons"] = std::move(rows);
  return j;
}

}  // namespace plottwist::stats
