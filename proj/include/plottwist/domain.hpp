#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace plottwist {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Narrative quality dimensions
// ---------------------------------------------------------------------------

enum class Aspect {
  CharacterDevelopment,
  ToneConsistency,
  Pacing,
  NarrativeCoherence,
  EmotionalTurningPoints,
};

inline constexpr std::size_t kAspectCount = 5;

/// Fixed iteration order used everywhere (tables, JSON objects, prompts).
inline constexpr std::array<Aspect, kAspectCount> kAllAspects = {
    Aspect::CharacterDevelopment, Aspect::ToneConsistency, Aspect::Pacing,
    Aspect::NarrativeCoherence, Aspect::EmotionalTurningPoints};

inline constexpr std::size_t index_of(Aspect a) { return static_cast<std::size_t>(a); }

/// JSON field name the rating prompts ask the model to emit.
std::string_view field_name(Aspect a);
/// Human-readable label ("Narrative Coherence").
std::string_view display_name(Aspect a);
std::optional<Aspect> aspect_from_field(std::string_view field);

/// Dense per-aspect storage indexed in kAllAspects order.
template <class T>
using PerAspect = std::array<T, kAspectCount>;

// ---------------------------------------------------------------------------
// Plot corpus
// ---------------------------------------------------------------------------

enum class SourceLabel { Original, Generated, GSAT, Razzie, Candidate };

std::string_view to_string(SourceLabel label);
SourceLabel source_label_from_string(std::string_view s);

/// Number of tokens obtained by splitting on unicode white space. Invalid
/// UTF-8 bytes count as non-space.
std::size_t count_words(std::string_view utf8);

struct PlotRecord {
  std::string id;
  std::string text;
  std::size_t word_count = 0;
  SourceLabel source_label = SourceLabel::Original;
  std::optional<double> external_rating;
  std::optional<std::string> generator_id;
  /// Original plot this one was derived from (via a premise), if any.
  std::optional<std::string> source_plot_id;
  /// Keys we do not interpret; written back unchanged.
  json extra = json::object();

  /// Builds a record with word_count derived from text.
  static PlotRecord make(std::string id, std::string text,
                         SourceLabel label = SourceLabel::Original);
};

PlotRecord plot_from_json(const json& j);
json to_json(const PlotRecord& p);

std::vector<PlotRecord> load_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, std::span<const PlotRecord> records);

/// Records with word_count <= max_words, input order preserved.
std::vector<PlotRecord> filter_by_length(std::span<const PlotRecord> records,
                                         std::size_t max_words);

// ---------------------------------------------------------------------------
// Quality strata
// ---------------------------------------------------------------------------

enum class QualityStratum { Excellent, Good, Mid, Low };

inline constexpr std::array<QualityStratum, 4> kAllStrata = {
    QualityStratum::Excellent, QualityStratum::Good, QualityStratum::Mid,
    QualityStratum::Low};

std::string_view to_string(QualityStratum s);

/// Excellent > 8, Good (7, 8], Mid (6, 7], Low <= 6. Throws DomainError
/// outside [0, 10] or for non-finite ratings.
QualityStratum stratify(double rating);

// ---------------------------------------------------------------------------
// Premises
// ---------------------------------------------------------------------------

struct Premise {
  std::string id;
  std::string text;
  std::optional<std::string> source_plot_id;
};

Premise premise_from_json(const json& j);
json to_json(const Premise& p);
std::vector<Premise> load_premises(const std::filesystem::path& path);
void save_premises(const std::filesystem::path& path, std::span<const Premise> premises);

}  // namespace plottwist
