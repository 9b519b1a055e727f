#include "plottwist/aspects.hpp"

#include <algorithm>
#include <numeric>

#include "plottwist/errors.hpp"

namespace plottwist::aspects {

namespace {

struct PolarTemplate {
  std::string_view positive_definition;
  std::string_view negative_definition;
  std::string_view negative_heading;
  bool short_rules;      // "Output only JSON." / "Integer 0–10."
  bool review_slot;      // plot slot followed by "| ### Review:"
};

// Indexed in kAllAspects order.
constexpr PerAspect<PolarTemplate> kTemplates = {{
    // Character Development
    {"Compelling character arcs, meaningful growth, clear motivations, well-developed "
     "relationships, authentic character voices, and satisfying character journeys. Emphasis is "
     "placed on characters who evolve, learn, or change meaningfully over the course of the story.",
     "Weak or static character arcs, lack of growth, unclear motivations, poorly developed "
     "relationships, inconsistent character voices, or unsatisfying character journeys. Emphasis "
     "is placed on characters who remain static, act illogically, or fail to develop meaningfully.",
     "Field Definition (Negative Focus):", false, true},
    // Tone Consistency
    {"Successful maintenance of mood, atmosphere, and stylistic coherence throughout the story. "
     "Effective emotional consistency, well-maintained genre conventions, and smooth transitions "
     "between story beats. Intentional tonal shifts are rewarded when they serve the narrative "
     "purpose.",
     "Jarring mood shifts, inconsistent atmosphere, conflicting stylistic elements, genre "
     "incoherence, or awkward tonal transitions that disrupt immersion or emotional continuity.",
     "Field Definition (Negative Focus):", false, true},
    // Pacing
    {"Effective narrative rhythm, well-balanced scene progression, appropriate timing of plot "
     "events, and smooth transitions that maintain momentum and audience engagement. Emphasis is "
     "placed on pacing that supports tension, emotional beats, and story clarity.",
     "Uneven or inconsistent pacing, excessive slowdowns or rushed segments, poorly timed plot "
     "events, unnecessary filler scenes, or abrupt transitions that disrupt narrative flow or "
     "emotional impact.",
     "Field Definition (Negative Focus):", false, true},
    // Narrative Coherence
    {"Narrative clarity, logical plot progression, coherent world-building, strong cause–effect "
     "relationships, and well-integrated subplots.",
     "Confusing storytelling, plot holes, inconsistent world-building, disconnected subplots, or "
     "illogical character decisions.",
     "Field Definition (NegativeFocus):", false, false},
    // Emotional Turning Points
    {"Powerful emotional moments, effective turning points, meaningful revelations, and "
     "emotionally satisfying narrative shifts.",
     "Flat emotional arcs, forced turning points, unearned twists, or moments that fail to engage "
     "the audience.",
     "Field Definition (Negative Focus):", true, true},
}};

}  // namespace

Prompt render_polar_prompt(Aspect aspect, Polarity polarity, const PlotRecord& plot) {
  const PolarTemplate& t = kTemplates[index_of(aspect)];
  const bool positive = polarity == Polarity::Positive;
  const std::string field(field_name(aspect));

  std::string sys =
      "You are a professional movie critic whose only output must be a single JSON object with "
      "exactly one integer field (0–10):\n";
  sys += display_name(aspect);
  sys += ": ";
  sys += positive ? std::string_view("Field Definition (Positive Focus):") : t.negative_heading;
  sys += "\n";
  sys += positive ? t.positive_definition : t.negative_definition;
  sys += "\n\nStrict output rules:\n";
  sys += t.short_rules ? "1. Output only JSON.\n" : "1. Output only a valid JSON object.\n";
  sys += "2. Include only " + field + ".\n";
  sys += t.short_rules ? "3. Integer 0–10.\n" : "3. Integer value from 0 to 10.\n";
  sys += positive ? "4. Score generously.\n" : "4. 0 = no issues, 10 = severe issues.\n";

  std::string user = "### MoviePlot: {" + plot.text + "}";
  if (t.review_slot) user += " | ### Review:";
  return {std::move(sys), std::move(user)};
}

int raw_sum(std::span<const PolarSignal> signals) {
  return std::accumulate(signals.begin(), signals.end(), 0,
                         [](int acc, const PolarSignal& s) { return acc + (s.positive - s.negative); });
}

double normalize(int raw_sum, int responding_models) {
  if (responding_models < 1) throw DomainError("normalize: responding_models must be >= 1");
  const double mean_diff = static_cast<double>(raw_sum) / responding_models;
  return std::clamp((mean_diff + 10.0) / 2.0, 0.0, 10.0);
}

AspectRating aggregate(std::string plot_id, Aspect aspect, std::vector<PolarSignal> signals,
                       std::vector<ModelFailure> failures) {
  if (signals.empty())
    throw RatingUnavailableError("plot " + plot_id + ": no model produced a rating for " +
                                 std::string(display_name(aspect)));
  for (const auto& s : signals)
    if (s.positive < 0 || s.positive > 10 || s.negative < 0 || s.negative > 10)
      throw DomainError("polar signal outside [0,10] from " + s.model_id);
  AspectRating r;
  r.plot_id = std::move(plot_id);
  r.aspect = aspect;
  r.raw_sum = raw_sum(signals);
  r.responding_models = static_cast<int>(signals.size());
  r.normalized = normalize(r.raw_sum, r.responding_models);
  r.signals = std::move(signals);
  r.failures = std::move(failures);
  return r;
}

AspectRating rate_aspect(const PlotRecord& plot, Aspect aspect,
                         std::span<const gateway::ModelEndpoint> ensemble,
                         gateway::Gateway& gateway) {
  if (ensemble.empty()) throw ConfigError("rating ensemble is empty");
  if (plot.text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw DomainError("plot " + plot.id + " has empty text");

  const Prompt pos = render_polar_prompt(aspect, Polarity::Positive, plot);
  const Prompt neg = render_polar_prompt(aspect, Polarity::Negative, plot);
  const std::string field(field_name(aspect));

  std::vector<PolarSignal> signals;
  std::vector<ModelFailure> failures;
  for (const auto& model : ensemble) {
    auto ask = [&](const Prompt& p) {
      const auto result = gateway.complete({model, p.system_prompt, p.user_prompt});
      return gateway::extract_integer_field(result.raw_text, field, 0, 10);
    };
    try {
      const int positive = ask(pos);
      const int negative = ask(neg);
      signals.push_back({aspect, model.model_id, positive, negative});
    } catch (const TransportError& e) {
      failures.push_back({model.model_id, e.what()});
    } catch (const ExtractionError& e) {
      failures.push_back({model.model_id, std::string(e.what()) + " in: " + e.raw().substr(0, 200)});
    }
  }
  return aggregate(plot.id, aspect, std::move(signals), std::move(failures));
}

PlotReward make_reward(std::string plot_id, PerAspect<AspectRating> per_aspect) {
  PlotReward r;
  r.plot_id = std::move(plot_id);
  double sum = 0.0;
  for (const auto& a : per_aspect) sum += a.normalized;
  r.per_aspect = std::move(per_aspect);
  r.overall = sum / static_cast<double>(kAspectCount);
  return r;
}

PlotReward score_plot(const PlotRecord& plot, std::span<const gateway::ModelEndpoint> ensemble,
                      gateway::Gateway& gateway) {
  PerAspect<AspectRating> per_aspect;
  for (Aspect a : kAllAspects) per_aspect[index_of(a)] = rate_aspect(plot, a, ensemble, gateway);
  return make_reward(plot.id, std::move(per_aspect));
}

json to_json(const AspectRating& r) {
  json j;
  j["raw_sum"] = r.raw_sum;
  j["normalized"] = r.normalized;
  j["responding_models"] = r.responding_models;
  json signals = json::array();
  for (const auto& s : r.signals)
    signals.push_back({{"model_id", s.model_id}, {"positive", s.positive}, {"negative", s.negative}});
  j["signals"] = std::move(signals);
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"model_id", f.model_id}, {"error", f.error}});
  j["failures"] = std::move(failures);
  return j;
}

json to_json(const PlotReward& r) {
  json j;
  j["plot_id"] = r.plot_id;
  j["overall"] = r.overall;
  json aspects = json::object();
  for (Aspect a : kAllAspects) aspects[std::string(field_name(a))] = to_json(r.per_aspect[index_of(a)]);
  j["aspects"] = std::move(aspects);
  return j;
}

PlotReward reward_from_json(const json& j) {
  try {
    PerAspect<AspectRating> per_aspect;
    const std::string plot_id = j.at("plot_id").get<std::string>();
    for (Aspect a : kAllAspects) {
      const json& aj = j.at("aspects").at(std::string(field_name(a)));
      std::vector<PolarSignal> signals;
      for (const auto& s : aj.at("signals"))
        signals.push_back({a, s.at("model_id").get<std::string>(), s.at("positive").get<int>(),
                           s.at("negative").get<int>()});
      std::vector<ModelFailure> failures;
      if (aj.contains("failures"))
        for (const auto& f : aj["failures"])
          failures.push_back({f.at("model_id").get<std::string>(), f.at("error").get<std::string>()});
      per_aspect[index_of(a)] = aggregate(plot_id, a, std::move(signals), std::move(failures));
    }
    return make_reward(plot_id, std::move(per_aspect));
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed rating record: ") + e.what());
  }
}

}  // namespace plottwist::aspects
