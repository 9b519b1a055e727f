#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plottwist/domain.hpp"
#include "plottwist/judge.hpp"
#include "plottwist/stats.hpp"

namespace plottwist::stats {

using ScoredPlot = std::pair<PlotRecord, judge::JudgeVerdict>;

struct StratifiedOptions {
  std::size_t resamples = 2000;
  double level = 0.95;
  std::uint64_t seed = 0;
};

/// Paired comparison of generated against original scores (same order).
/// mean_diff is mean(generated - original); the CI is a bootstrap over the
/// paired differences (absent for n < 2) and cohens_d is mean/SD of the
/// differences (absent when they are constant). Welch's t on the two columns
/// is kept as a secondary check when both have variance.
ComparisonResult paired_compare(std::string label, std::span<const double> original,
                                std::span<const double> generated, std::size_t resamples,
                                double level, std::uint64_t seed);

struct StratifiedReport {
  QualityStratum stratum = QualityStratum::Low;
  std::size_t n = 0;  ///< pairs in the stratum; 0 leaves every result empty
  PerAspect<std::optional<ComparisonResult>> per_aspect;
  PerAspect<std::optional<double>> dominance;
  /// Same analysis on the five-aspect mean score.
  std::optional<ComparisonResult> overall;
  std::optional<double> overall_dominance;
};

/// Pairs each generated record with the original named by its
/// source_plot_id, buckets pairs by stratify(original.external_rating) and
/// compares per aspect. Returns one report per stratum, Excellent first.
/// Throws PairingError for records without exactly one partner and
/// DomainError for originals lacking an external rating.
std::vector<StratifiedReport> stratified_analysis(std::span<const ScoredPlot> originals,
                                                  std::span<const ScoredPlot> generated,
                                                  const StratifiedOptions& options = {});

json to_json(const StratifiedReport& r);

}  // namespace plottwist::stats
