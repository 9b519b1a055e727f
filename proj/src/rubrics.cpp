// Ten-criterion judge rubrics, one per narrative quality dimension.
#include <string>

#include "plottwist/judge.hpp"

namespace plottwist::judge {

namespace {

std::string output_format(const std::array<std::string_view, kCriteria>& criteria) {
  std::string out = "Output Format\n";
  for (std::size_t i = 0; i < kCriteria; ++i)
    out += std::to_string(i + 1) + ". " + std::string(criteria[i]) + ": X.X\n";
  out += "TOTAL: X.X/10\n";
  return out;
}

RubricSpec make(Aspect aspect, std::array<std::string_view, kCriteria> criteria,
                std::string_view body) {
  RubricSpec spec{aspect, criteria, std::string(body)};
  spec.prompt_template += "\n";
  spec.prompt_template += output_format(criteria);
  return spec;
}

constexpr std::string_view kNarrativeCoherence = R"(Narrative Coherence Evaluation

Task Overview
Evaluate a movie plot’s narrative structure and logical consistency using a 10-criteria framework. Assign precise numerical scores reflecting coherence quality.

Evaluation Methodology
Each criterion is scored from 0–1 (increments of 0.1 allowed). Scores are summed for a total out of 10.

Scoring Criteria
Plot Structure and Logic (4 points)
1. Plot Progression
   Logical beginning–middle–end flow.
2. Causal Connectivity
   Events arise naturally from prior actions.
3. Plot Integrity
   No plot holes or contradictions.
4. Conflict Focus
   A sustained central conflict drives the story.
Character Integration (3 points)
5. Protagonist Consistency
6. Supporting Character Function
7. Resolution Authenticity
Narrative Flow and Unity (3 points)
8. Pacing Appropriateness
9. Thematic Integration
10. Tonal Consistency
)";

constexpr std::string_view kEmotionalTurningPoints = R"(Emotional Turning Point Evaluation

Task Overview
Identify and evaluate the primary emotional turning point of the narrative using a 10-criteria framework focused on emotional impact and character change.

Scoring Criteria
Conflict & Character Foundation (4 points)
1. Conflict Resolution
   Addresses or reframes central conflict.
2. Character Believability
   Emotion aligns with established arc.
3. Character Transformation
   Meaningful internal change.
4. Emotional Satisfaction
   Emotionally resonant payoff.
Narrative Construction (3 points)
5. Narrative Causality
6. Thematic Crystallization
7. Relationship Impact
Technical & Structural Elements (3 points)
8. Cinematic Execution
9. Structural Necessity
10. Audience Alignment
)";

constexpr std::string_view kCharacterDevelopment = R"(Character Development Evaluation

Task Overview
Evaluate protagonist character development using a 10-criteria framework assessing motivation, arc progression, and narrative function.

Scoring Criteria
Core Character Elements (4 points)
1. Motivation Clarity
   Clear goals and desires.
2. Behavioral Consistency
   Actions align with personality.
3. Character Arc
   Believable transformation.
4. Psychological Depth
   Emotional and psychological complexity.
Character Foundation (3 points)
5. Backstory Integration
6. Audience Connection
7. Character Distinctiveness
Narrative Function (3 points)
8. Relationship Dynamics
9. Plot Agency
10. Thematic Alignment
)";

constexpr std::string_view kPacing = R"(Pacing Analysis Evaluation

Task Overview
Assess narrative pacing using a 10-criteria framework measuring rhythm, momentum, and emotional timing.

Scoring Criteria
1. Premise Establishment Speed
2. Structural Foundation
3. Pacing Consistency
4. Event Frequency
5. Scene Purposefulness
6. Tension Management
7. Transition Quality
8. Emotional Beat Timing
9. Climax Timing
10. Genre–Tone Alignment
)";

constexpr std::string_view kToneConsistency = R"(Tone Consistency Evaluation

Task Overview
Evaluate tonal coherence using a 10-criteria framework assessing atmosphere, stylistic unity, and emotional continuity.

Scoring Criteria
1. Initial Atmosphere Establishment
2. Scene-to-Scene Consistency
3. Tonal Relief Integration
4. Earned Tone Shifts
5. Dialogue Style Consistency
6. Visual Reinforcement
7. Stakes Alignment
8. Comedy/Drama Balance
9. Ending Consistency
10. Motif and Symbol Unity
)";

const PerAspect<RubricSpec>& all_rubrics() {
  static const PerAspect<RubricSpec> rubrics = {
      make(Aspect::CharacterDevelopment,
           {"Motivation Clarity", "Behavioral Consistency", "Character Arc", "Psychological Depth",
            "Backstory Integration", "Audience Connection", "Character Distinctiveness",
            "Relationship Dynamics", "Plot Agency", "Thematic Alignment"},
           kCharacterDevelopment),
      make(Aspect::ToneConsistency,
           {"Initial Atmosphere Establishment", "Scene-to-Scene Consistency",
            "Tonal Relief Integration", "Earned Tone Shifts", "Dialogue Style Consistency",
            "Visual Reinforcement", "Stakes Alignment", "Comedy/Drama Balance",
            "Ending Consistency", "Motif and Symbol Unity"},
           kToneConsistency),
      make(Aspect::Pacing,
           {"Premise Establishment Speed", "Structural Foundation", "Pacing Consistency",
            "Event Frequency", "Scene Purposefulness", "Tension Management", "Transition Quality",
            "Emotional Beat Timing", "Climax Timing", "Genre–Tone Alignment"},
           kPacing),
      make(Aspect::NarrativeCoherence,
           {"Plot Progression", "Causal Connectivity", "Plot Integrity", "Conflict Focus",
            "Protagonist Consistency", "Supporting Character Function", "Resolution Authenticity",
            "Pacing Appropriateness", "Thematic Integration", "Tonal Consistency"},
           kNarrativeCoherence),
      make(Aspect::EmotionalTurningPoints,
           {"Conflict Resolution", "Character Believability", "Character Transformation",
            "Emotional Satisfaction", "Narrative Causality", "Thematic Crystallization",
            "Relationship Impact", "Cinematic Execution", "Structural Necessity",
            "Audience Alignment"},
           kEmotionalTurningPoints),
  };
  return rubrics;
}

}  // namespace

const RubricSpec& rubric(Aspect aspect) { return all_rubrics()[index_of(aspect)]; }

Prompt render_rubric_prompt(Aspect aspect, const PlotRecord& plot) {
  if (plot.text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw DomainError("plot " + plot.id + " has empty text");
  return {rubric(aspect).prompt_template,
          "Evaluate the following movie plot.\n\n### MoviePlot:\n" + plot.text};
}

}  // namespace plottwist::judge
