#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plottwist/aspects.hpp"
#include "plottwist/domain.hpp"
#include "plottwist/gateway.hpp"
#include "plottwist/generation.hpp"

namespace plottwist::curation {

// ---------------------------------------------------------------------------
// Premises
// ---------------------------------------------------------------------------

struct PremisePrompt {
  std::string system_prompt;
  std::string user_prompt;
};

PremisePrompt render_premise_prompt(const PlotRecord& plot);

/// Asks `generator` for a one-sentence premise of `plot`. The premise id is
/// "premise-<plot id>". Throws DomainError for an empty plot and
/// ExtractionError when the reply is blank.
Premise generate_premise(const PlotRecord& plot, const gateway::ModelEndpoint& generator,
                         gateway::Gateway& gateway);

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

enum class RejectedPolicy { Base, RunnerUp };

std::string_view to_string(RejectedPolicy p);
RejectedPolicy rejected_policy_from_string(std::string_view s);

enum class RejectionReason {
  PremiseFailed,
  BaseMissing,
  ScoringFailed,
  BestNotFrontier,
  BelowThreshold,
  InsufficientMargin,
};

inline constexpr std::array<RejectionReason, 6> kAllReasons = {
    RejectionReason::PremiseFailed,   RejectionReason::BaseMissing,
    RejectionReason::ScoringFailed,   RejectionReason::BestNotFrontier,
    RejectionReason::BelowThreshold,  RejectionReason::InsufficientMargin};

std::string_view to_string(RejectionReason r);

struct Candidate {
  std::string generator_id;
  PlotRecord plot;
  double overall = 0.0;
  std::optional<aspects::PlotReward> reward;
};

struct CandidateSet {
  Premise premise;
  std::string prompt;  ///< generation prompt shared by every candidate
  std::vector<Candidate> candidates;
  std::set<std::string> frontier_ids;
  std::string base_id;

  /// Throws DomainError when base is a frontier id, is absent, or a
  /// generator id repeats.
  void validate() const;
};

struct SelectionAudit {
  std::string winner_id;
  std::string runner_up_id;
  std::string rejected_id;
  double threshold = 8.0;
  double margin_required = 0.5;
  RejectedPolicy policy = RejectedPolicy::Base;
};

struct PreferencePair {
  std::string premise_id;
  std::string premise_text;
  std::string prompt;
  std::string chosen_text;
  std::string rejected_text;
  double chosen_score = 0.0;
  double rejected_score = 0.0;
  double runner_up_score = 0.0;
  double margin = 0.0;  ///< chosen_score - runner_up_score
  SelectionAudit audit;
};

struct SelectionOptions {
  double threshold = 8.0;
  double margin = 0.5;
  RejectedPolicy policy = RejectedPolicy::Base;
};

/// Scores closer than this compare equal in the threshold and margin tests,
/// so that e.g. 8.55 - 8.05 counts as a 0.5 margin.
inline constexpr double kScoreTolerance = 1e-9;

struct Selection {
  std::optional<PreferencePair> pair;
  std::optional<RejectionReason> reason;  ///< set exactly when pair is empty
};

/// best = top overall score (a frontier candidate wins ties, the smallest id
/// among tied frontiers); runner-up = top among the rest. A pair is emitted
/// iff best is frontier, best > threshold and best - runner-up >= margin;
/// otherwise the first failed condition in that order is the reason.
Selection select_preference_pair(const CandidateSet& set, const SelectionOptions& options = {});

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct GeneratorSet {
  gateway::ModelEndpoint premise;
  generation::GenerationConfig base;
  std::vector<generation::GenerationConfig> frontier;
};

struct CurationOptions {
  SelectionOptions selection;
  int jobs = 1;
};

struct PremiseOutcome {
  std::string plot_id;
  std::string premise_id;
  std::optional<Premise> premise;         ///< empty when premise generation failed
  std::optional<RejectionReason> reason;  ///< empty when a pair was emitted
  std::string detail;
  std::vector<std::pair<std::string, double>> scores;  ///< generator -> overall
  std::vector<generation::GenerationGap> gaps;
};

struct CurationReport {
  std::size_t premises = 0;
  std::size_t pairs = 0;
  std::map<RejectionReason, std::size_t> rejections;
  std::vector<PremiseOutcome> outcomes;  ///< ordered by premise id
};

struct CurationResult {
  std::vector<PreferencePair> pairs;  ///< ordered by premise id
  CurationReport report;
};

/// premise -> candidates -> rewards -> selection for every plot in `corpus`.
/// Per-premise failures go to the report; ConfigError and ScriptGapError
/// abort.
CurationResult curate(std::span<const PlotRecord> corpus, const GeneratorSet& generators,
                      std::span<const gateway::ModelEndpoint> ensemble, gateway::Gateway& gateway,
                      const CurationOptions& options = {});

json to_json(const CurationReport& r);

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

struct ExportMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  SelectionOptions selection;
};

/// `<stem>.manifest.json` next to the JSONL file.
std::filesystem::path sidecar_path(const std::filesystem::path& jsonl);

/// Writes one {"prompt","chosen","rejected"} line per pair plus the sidecar
/// manifest with audit trails and scores. Throws IoError with the path.
void export_dpo(std::span<const PreferencePair> pairs, const std::filesystem::path& path,
                const ExportMeta& meta);

/// Reads an export back, joining lines with the sidecar entries.
std::vector<PreferencePair> import_dpo(const std::filesystem::path& path);

json to_json(const PreferencePair& p);

}  // namespace plottwist::curation
