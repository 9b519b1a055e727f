#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace plottwist::stats {

using json = nlohmann::ordered_json;

double mean(std::span<const double> xs);
/// Unbiased (n - 1) variance. Throws DegenerateInputError for n < 2.
double sample_variance(std::span<const double> xs);

/// I_x(a, b), evaluated by Lentz's continued fraction to ~1e-15 relative.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
};

/// Welch's unequal-variance t-test of mean(a) - mean(b). Requires at least
/// two values and nonzero variance on each side.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

/// (mean(a) - mean(b)) / pooled SD over n_a + n_b - 2 degrees of freedom.
double cohens_d(std::span<const double> a, std::span<const double> b);

/// mean(diffs) / sd(diffs), the paired-sample effect size.
double paired_cohens_d(std::span<const double> diffs);

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Percentile interval of the mean over `resamples` with-replacement
/// resamples; reproducible from `seed`.
Interval bootstrap_ci_paired(std::span<const double> diffs, std::size_t resamples, double level,
                             std::uint64_t seed);

struct ScoredSample {
  std::string label;
  std::vector<double> values;
};

struct ComparisonResult {
  std::string label;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double mean_diff = 0.0;
  std::optional<double> t_stat;
  std::optional<double> dof;
  std::optional<double> p_value;
  std::optional<double> cohens_d;
  std::string effect_size;  ///< "pooled" (independent samples) or "paired"
  std::optional<Interval> ci;
  double directional_consistency = 0.0;
};

/// Compares a fixed minority sample against equal-size random subsets of the
/// majority over `runs` runs. mean_diff and ci summarize the per-run
/// (majority subset - minority) differences; directional_consistency is the
/// fraction of runs with a positive difference; t, p and d are computed once
/// on the full samples (majority vs minority).
ComparisonResult balanced_subsample_compare(const ScoredSample& minority,
                                            const ScoredSample& majority, std::size_t runs,
                                            std::uint64_t seed, double level = 0.95);

/// Fraction of (original, generated) pairs where generated > original.
double dominance_probability(std::span<const std::pair<double, double>> pairs);

json to_json(const ComparisonResult& r);

}  // namespace plottwist::stats
