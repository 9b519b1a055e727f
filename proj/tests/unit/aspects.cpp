#include <doctest.h>

#include <algorithm>
#include <vector>

#include "plottwist/aspects.hpp"
#include "plottwist/errors.hpp"
#include "support.hpp"

using namespace plottwist;
using namespace plottwist::aspects;
using plottwist::testing::scripted;

namespace {

// A rater that answers every positive prompt with `pos` and every negative
// prompt with `neg`, echoing the requested field name.
gateway::ModelEndpoint rater(const std::string& id, int pos, int neg) {
  const json capture = {{"f", "Include only ([A-Za-z_]+)\\."}};
  return scripted(id, {{"rules",
                        {{{"name", "pos"}, {"all", {"Field Definition (Positive"}}, {"capture", capture},
                          {"respond", "{\"{{f}}\": " + std::to_string(pos) + "}"}},
                         {{"name", "neg"}, {"all", {"Field Definition (Negative"}}, {"capture", capture},
                          {"respond", "{\"{{f}}\": " + std::to_string(neg) + "}"}}}}});
}

gateway::ModelEndpoint broken(const std::string& id) {
  return scripted(id, {{"rules", {{{"name", "down"}, {"all", {"MoviePlot"}}, {"respond", {{"fail", "503"}}}}}}}, 0);
}

const PlotRecord kPlot = PlotRecord::make("p1", "A lighthouse keeper finds a map in a bottle.");

AspectRating rating_with(double normalized) {
  AspectRating r;
  r.normalized = normalized;
  r.responding_models = 1;
  return r;
}

}  // namespace

TEST_SUITE("aspects") {
  TEST_CASE("polar prompts carry the rubric wording and the JSON field") {
    const auto nc = render_polar_prompt(Aspect::NarrativeCoherence, Polarity::Positive, kPlot);
    // Typeset dashes in the rubric text are sent as U+2013.
    CHECK(nc.system_prompt.find("strong cause\u2013effect relationships") != std::string::npos);
    CHECK(nc.system_prompt.find("Narrative_Coherence") != std::string::npos);
    CHECK(nc.user_prompt.find(kPlot.text) != std::string::npos);

    const auto pacing = render_polar_prompt(Aspect::Pacing, Polarity::Negative, kPlot);
    CHECK(pacing.system_prompt.find("0 = no issues, 10 = severe issues") != std::string::npos);

    const auto again = render_polar_prompt(Aspect::Pacing, Polarity::Negative, kPlot);
    CHECK(again.system_prompt == pacing.system_prompt);
    CHECK(again.user_prompt == pacing.user_prompt);

    for (Aspect a : kAllAspects)
      for (Polarity p : {Polarity::Positive, Polarity::Negative})
        CHECK(render_polar_prompt(a, p, kPlot).system_prompt.find("Include only " + std::string(field_name(a)) + ".") !=
              std::string::npos);
  }

  TEST_CASE("five agreeing raters") {
    std::vector<gateway::ModelEndpoint> ensemble;
    for (int i = 0; i < 5; ++i) ensemble.push_back(rater("r" + std::to_string(i), 9, 2));
    auto gw = testing::quiet_gateway();
    const auto r = rate_aspect(kPlot, Aspect::Pacing, ensemble, gw);
    CHECK(r.raw_sum == 35);
    CHECK(r.normalized == 8.5);
    CHECK(r.responding_models == 5);
    CHECK(r.failures.empty());
  }

  TEST_CASE("balanced scores land on the midpoint") {
    std::vector<gateway::ModelEndpoint> ensemble = {rater("a", 4, 4), rater("b", 7, 7), rater("c", 0, 0)};
    auto gw = testing::quiet_gateway();
    const auto r = rate_aspect(kPlot, Aspect::ToneConsistency, ensemble, gw);
    CHECK(r.raw_sum == 0);
    CHECK(r.normalized == 5.0);
  }

  TEST_CASE("a failing rater is dropped and the rest renormalized") {
    std::vector<gateway::ModelEndpoint> ensemble;
    for (int i = 0; i < 4; ++i) ensemble.push_back(rater("r" + std::to_string(i), 10, 0));
    ensemble.push_back(broken("dead"));
    auto gw = testing::quiet_gateway();
    const auto r = rate_aspect(kPlot, Aspect::CharacterDevelopment, ensemble, gw);
    CHECK(r.responding_models == 4);
    CHECK(r.raw_sum == 40);
    CHECK(r.normalized == 10.0);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].model_id == "dead");
  }

  TEST_CASE("unparseable output counts as a failure") {
    auto prose = scripted("prose", {{"rules", {{{"name", "any"}, {"all", {"MoviePlot"}}, {"respond", "It is fine."}}}}});
    std::vector<gateway::ModelEndpoint> ensemble = {rater("ok", 6, 1), prose};
    auto gw = testing::quiet_gateway();
    const auto r = rate_aspect(kPlot, Aspect::Pacing, ensemble, gw);
    CHECK(r.responding_models == 1);
    CHECK(r.raw_sum == 5);
    CHECK(r.failures.size() == 1);
  }

  TEST_CASE("no responding rater means no rating") {
    std::vector<gateway::ModelEndpoint> ensemble = {broken("x"), broken("y")};
    auto gw = testing::quiet_gateway();
    CHECK_THROWS_AS(rate_aspect(kPlot, Aspect::Pacing, ensemble, gw), RatingUnavailableError);
    CHECK_THROWS_AS(aggregate("p", Aspect::Pacing, {}), RatingUnavailableError);
  }

  TEST_CASE("normalization is clamped and rejects out-of-range signals") {
    CHECK(normalize(50, 5) == 10.0);
    CHECK(normalize(-50, 5) == 0.0);
    CHECK(normalize(-10, 5) == 4.0);
    CHECK_THROWS_AS(normalize(3, 0), DomainError);
    PolarSignal bad;
    bad.positive = 11;
    CHECK_THROWS_AS(aggregate("p", Aspect::Pacing, {bad}), DomainError);
  }

  TEST_CASE("overall reward is the mean of the five aspects") {
    PerAspect<AspectRating> same;
    for (auto& r : same) r = rating_with(8.5);
    CHECK(make_reward("p", same).overall == 8.5);
    PerAspect<AspectRating> mixed = {rating_with(10), rating_with(5), rating_with(5), rating_with(5), rating_with(0)};
    CHECK(make_reward("p", mixed).overall == 5.0);
  }

  TEST_CASE("rewards do not depend on ensemble order") {
    std::vector<gateway::ModelEndpoint> ensemble = {rater("a", 9, 1), rater("b", 6, 3), rater("c", 8, 4),
                                                    broken("d"), rater("e", 2, 7)};
    auto gw = testing::quiet_gateway();
    const auto forward = score_plot(kPlot, ensemble, gw);
    std::reverse(ensemble.begin(), ensemble.end());
    const auto backward = score_plot(kPlot, ensemble, gw);
    CHECK(forward.overall == backward.overall);
    for (std::size_t i = 0; i < kAspectCount; ++i) {
      CHECK(forward.per_aspect[i].raw_sum == backward.per_aspect[i].raw_sum);
      CHECK(forward.per_aspect[i].normalized == backward.per_aspect[i].normalized);
    }
    CHECK(forward.per_aspect[0].raw_sum == 9 - 1 + 6 - 3 + 8 - 4 + 2 - 7);
  }

  TEST_CASE("rewards survive a JSON round trip") {
    std::vector<gateway::ModelEndpoint> ensemble = {rater("a", 9, 1), broken("b")};
    auto gw = testing::quiet_gateway();
    const auto r = score_plot(kPlot, ensemble, gw);
    const auto back = reward_from_json(to_json(r));
    CHECK(back.plot_id == r.plot_id);
    CHECK(back.overall == r.overall);
    CHECK(to_json(back) == to_json(r));
  }
}
