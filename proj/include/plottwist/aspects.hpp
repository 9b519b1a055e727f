#pragma once

#include <span>
#include <string>
#include <vector>

#include "plottwist/domain.hpp"
#include "plottwist/gateway.hpp"

namespace plottwist::aspects {

enum class Polarity { Positive, Negative };

struct Prompt {
  std::string system_prompt;
  std::string user_prompt;
};

/// Critic prompt asking for one integer field rating only the strengths
/// (Positive) or only the weaknesses (Negative) of `plot` along `aspect`.
Prompt render_polar_prompt(Aspect aspect, Polarity polarity, const PlotRecord& plot);

struct PolarSignal {
  Aspect aspect = Aspect::Pacing;
  std::string model_id;
  int positive = 0;  ///< strengths score, 0..10
  int negative = 0;  ///< weaknesses score, 0..10 (10 = severe issues)
};

struct ModelFailure {
  std::string model_id;
  std::string error;
};

struct AspectRating {
  std::string plot_id;
  Aspect aspect = Aspect::Pacing;
  std::vector<PolarSignal> signals;
  std::vector<ModelFailure> failures;
  int raw_sum = 0;           ///< sum over models of (positive - negative)
  double normalized = 0.0;   ///< per-model mean difference mapped onto [0, 10]
  int responding_models = 0;
};

/// Sum of (positive - negative) over the signals.
int raw_sum(std::span<const PolarSignal> signals);

/// ((raw_sum / responding) + 10) / 2 clamped to [0, 10].
double normalize(int raw_sum, int responding_models);

/// Builds a rating from collected signals. Throws RatingUnavailableError when
/// `signals` is empty.
AspectRating aggregate(std::string plot_id, Aspect aspect, std::vector<PolarSignal> signals,
                       std::vector<ModelFailure> failures = {});

/// Queries every ensemble model with the positive and the negative prompt.
/// Models whose call fails after retries, or whose output cannot be parsed,
/// are dropped and listed in `failures`.
AspectRating rate_aspect(const PlotRecord& plot, Aspect aspect,
                         std::span<const gateway::ModelEndpoint> ensemble,
                         gateway::Gateway& gateway);

struct PlotReward {
  std::string plot_id;
  PerAspect<AspectRating> per_aspect;
  double overall = 0.0;  ///< mean of the five normalized values
};

PlotReward make_reward(std::string plot_id, PerAspect<AspectRating> per_aspect);

PlotReward score_plot(const PlotRecord& plot, std::span<const gateway::ModelEndpoint> ensemble,
                      gateway::Gateway& gateway);

json to_json(const AspectRating& r);
json to_json(const PlotReward& r);
PlotReward reward_from_json(const json& j);

}  // namespace plottwist::aspects
