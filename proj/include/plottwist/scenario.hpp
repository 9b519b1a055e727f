#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace plottwist::scenario {

/// Candidate quality in hundredths of an overall reward (860 = 8.60), or a
/// scripted failure.
struct Grade {
  enum class Kind { Score, GenerationFails, Unratable };
  Kind kind = Kind::Score;
  int hundredths = 0;
};

enum class PremiseMode { Ok, Fails, FailsOnce };

/// One corpus plot and everything the mocks are scripted to do with it.
struct Row {
  std::string id;
  std::string title;
  std::string protagonist;
  std::string conflict;
  std::string setting;
  double rating = 0.0;
  std::string label;  ///< "gsat" or "razzie"
  int original_grade = 0;
  PremiseMode premise = PremiseMode::Ok;
  Grade base, frontier_a, frontier_b;
  std::string expected;  ///< "pair" or a rejection reason name
};

inline constexpr const char* kBaseId = "mock-base-moe";
inline constexpr const char* kFrontierA = "mock-frontier-a";
inline constexpr const char* kFrontierB = "mock-frontier-b";
inline constexpr const char* kPremiseId = "mock-premise";
inline constexpr const char* kJudgeId = "mock-judge";
inline constexpr int kRaters = 5;

/// The bundled 20-plot table.
const std::vector<Row>& mock_rows();

struct File {
  std::string path;  ///< relative to the scenario directory
  std::string content;
};

/// Every file of the bundled scenario, byte-stable.
std::vector<File> mock_scenario_files();

void write_mock_scenario(const std::filesystem::path& dir);

/// Text of the candidate plot `generator_id` writes for `row`.
std::string candidate_text(const Row& row, const std::string& generator_id, const Grade& grade);
std::string premise_text(const Row& row);

}  // namespace plottwist::scenario
