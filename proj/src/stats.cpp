#include "plottwist/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plottwist/errors.hpp"
#include "plottwist/stats_kernels.hpp"

namespace plottwist::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateInputError("mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw DegenerateInputError("variance needs at least two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw DegenerateInputError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw DomainError("t distribution needs dof > 0");
  if (std::isnan(t)) throw DomainError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return std::clamp(regularized_incomplete_beta(0.5 * dof, 0.5, x), 0.0, 1.0);
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DegenerateInputError("welch_t needs at least two values per sample");
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  if (va <= 0.0 || vb <= 0.0) throw DegenerateInputError("welch_t needs nonzero variance in both samples");
  const double se2 = va + vb;
  WelchResult r;
  r.t = (mean(a) - mean(b)) / std::sqrt(se2);
  r.dof = se2 * se2 /
          (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  r.p = student_t_two_sided_p(r.t, r.dof);
  return r;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DegenerateInputError("cohens_d needs at least two values per sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
  if (pooled <= 0.0) throw DegenerateInputError("cohens_d: zero pooled variance");
  return (mean(a) - mean(b)) / std::sqrt(pooled);
}

double paired_cohens_d(std::span<const double> diffs) {
  const double var = sample_variance(diffs);
  if (var <= 0.0) throw DegenerateInputError("paired effect size: differences have zero variance");
  return mean(diffs) / std::sqrt(var);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DegenerateInputError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

Interval percentile_interval(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile_sorted(values, tail), quantile_sorted(values, 1.0 - tail)};
}

}  // namespace

Interval bootstrap_ci_paired(std::span<const double> diffs, std::size_t resamples, double level,
                             std::uint64_t seed) {
  if (diffs.size() < 2) throw DegenerateInputError("bootstrap needs at least two differences");
  if (resamples < 1000) throw DomainError("bootstrap needs at least 1000 resamples");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  return percentile_interval(kernels::bootstrap_means_parallel(diffs, resamples, seed), level);
}

ComparisonResult balanced_subsample_compare(const ScoredSample& minority,
                                            const ScoredSample& majority, std::size_t runs,
                                            std::uint64_t seed, double level) {
  if (minority.values.size() < 2) throw DomainError("minority sample needs at least two values");
  if (majority.values.size() < minority.values.size())
    throw DomainError("majority sample must be at least as large as the minority sample");
  if (runs < 1) throw DomainError("runs must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");

  const auto diffs = kernels::subsample_diffs_parallel(minority.values, majority.values, runs, seed);

  ComparisonResult r;
  r.label = majority.label + " vs " + minority.label;
  r.n_a = majority.values.size();
  r.n_b = minority.values.size();
  r.mean_a = mean(majority.values);
  r.mean_b = mean(minority.values);
  r.mean_diff = mean(diffs);
  r.ci = percentile_interval(diffs, level);
  r.directional_consistency =
      static_cast<double>(std::count_if(diffs.begin(), diffs.end(), [](double d) { return d > 0.0; })) /
      static_cast<double>(runs);
  r.effect_size = "pooled";
  try {
    const WelchResult w = welch_t(majority.values, minority.values);
    r.t_stat = w.t;
    r.dof = w.dof;
    r.p_value = w.p;
  } catch (const DegenerateInputError&) {
  }
  try {
    r.cohens_d = cohens_d(majority.values, minority.values);
  } catch (const DegenerateInputError&) {
  }
  return r;
}

double dominance_probability(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw DomainError("dominance_probability needs at least one pair");
  const auto wins = std::count_if(pairs.begin(), pairs.end(),
                                  [](const auto& p) { return p.second > p.first; });
  return static_cast<double>(wins) / static_cast<double>(pairs.size());
}

json to_json(const ComparisonResult& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["label"] = r.label;
  j["n_a"] = r.n_a;
  j["n_b"] = r.n_b;
  j["mean_a"] = r.mean_a;
  j["mean_b"] = r.mean_b;
  j["mean_diff"] = r.mean_diff;
  j["ci_low"] = r.ci ? json(r.ci->low) : json(nullptr);
  j["ci_high"] = r.ci ? json(r.ci->high) : json(nullptr);
  j["t_stat"] = opt(r.t_stat);
  j["dof"] = opt(r.dof);
  j["p_value"] = opt(r.p_value);
  j["cohens_d"] = opt(r.cohens_d);
  j["effect_size"] = r.effect_size;
  j["directional_consistency"] = r.directional_consistency;
  return j;
}

}  // namespace plottwist::stats
