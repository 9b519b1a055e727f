#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plottwist/domain.hpp"
#include "plottwist/gateway.hpp"

namespace plottwist::generation {

inline constexpr std::string_view kPremiseSlot = "{premise}";
inline constexpr std::string_view kDefaultTemplate = "Generate a movie plot that follows {premise}";

struct GenerationConfig {
  gateway::ModelEndpoint endpoint;
  std::string prompt_template{kDefaultTemplate};
  std::optional<std::size_t> max_output_words;

  /// Throws ConfigError unless the template holds exactly one premise slot
  /// and max_output_words (when set) is positive.
  void validate() const;
};

/// The user prompt sent to a generator for `premise`.
std::string render_generation_prompt(std::string_view prompt_template, const Premise& premise);

/// Generates one plot. The record id is "<premise id>@<model id>"; over-long
/// output is kept whole and marked with extra["exceeds_max_words"].
PlotRecord generate_plot(const Premise& premise, const GenerationConfig& config,
                         gateway::Gateway& gateway);

struct GenerationGap {
  std::string premise_id;
  std::string generator_id;
  std::string error;
};

struct BatchResult {
  /// cells[p][c] for premise p and config c; empty where generation failed.
  std::vector<std::vector<std::optional<PlotRecord>>> cells;
  std::vector<GenerationGap> gaps;

  /// Successful records, premise-major.
  std::vector<PlotRecord> records() const;
};

/// Every premise against every config. Transport failures become gaps;
/// configuration problems and script gaps abort.
BatchResult generate_batch(std::span<const Premise> premises,
                           std::span<const GenerationConfig> configs, gateway::Gateway& gateway,
                           int jobs = 1);

}  // namespace plottwist::generation
