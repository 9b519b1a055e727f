#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "plottwist/domain.hpp"
#include "plottwist/stats.hpp"

namespace plottwist::stats {

/// Per-plot scores from either a ratings file (reward model output) or a
/// verdicts file (rubric judge output).
struct ScoredSet {
  std::string label;
  std::vector<std::string> plot_ids;
  std::vector<PerAspect<double>> aspects;
  std::vector<double> overall;

  std::size_t size() const { return plot_ids.size(); }
};

/// Detects the record kind per line: verdicts carry "mean_score", ratings
/// carry "overall".
ScoredSet load_scored(const std::filesystem::path& path, std::string label);

struct ValidationReport {
  std::string high_label;
  std::string low_label;
  std::string majority;  ///< which label was subsampled
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  /// One row per aspect field, then "overall" (per-plot mean of the five
  /// aspects) and "pooled" (every aspect score as its own observation).
  std::vector<std::pair<std::string, ComparisonResult>> rows;
};

/// Balanced subsampling comparison of `high` against `low`. The larger set
/// is the majority; every row's difference is majority minus minority.
ValidationReport validate_groups(const ScoredSet& high, const ScoredSet& low, std::size_t runs,
                                 std::uint64_t seed);

json to_json(const ValidationReport& r);

}  // namespace plottwist::stats
