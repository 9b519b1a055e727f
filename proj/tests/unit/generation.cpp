#include <doctest.h>

#include "plottwist/errors.hpp"
#include "plottwist/generation.hpp"
#include "plottwist/jsonl.hpp"
#include "plottwist/mock.hpp"
#include "support.hpp"

using namespace plottwist;
using namespace plottwist::generation;
using plottwist::testing::scripted;

namespace {

GenerationConfig writer(const std::string& id, bool fails = false) {
  json reply = fails ? json{{"fail", "503"}} : json(id + " writes: {{p}}");
  GenerationConfig c;
  c.endpoint = scripted(id, {{"rules", {{{"name", "any"},
                                         {"all", {"Generate a movie plot that follows"}},
                                         {"capture", {{"p", "follows (.*)"}}},
                                         {"respond", reply}}}}});
  return c;
}

const std::vector<Premise> kPremises = {{"pr1", "a thief who steals time.", "o1"},
                                        {"pr2", "a town that forgets every Sunday.", "o2"}};

}  // namespace

TEST_SUITE("generation") {
  TEST_CASE("prompt rendering fills the single slot") {
    CHECK(render_generation_prompt(kDefaultTemplate, kPremises[0]) ==
          "Generate a movie plot that follows a thief who steals time.");
    CHECK_THROWS_AS(render_generation_prompt("no slot here", kPremises[0]), ConfigError);
    GenerationConfig c = writer("w");
    c.prompt_template = "{premise} and {premise}";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.prompt_template = std::string(kDefaultTemplate);
    c.max_output_words = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("a generated record carries its provenance") {
    auto gw = testing::quiet_gateway();
    const auto p = generate_plot(kPremises[0], writer("w1"), gw);
    CHECK(p.id == "pr1@w1");
    CHECK(p.text == "w1 writes: a thief who steals time.");
    CHECK(p.source_label == SourceLabel::Generated);
    CHECK(p.generator_id == "w1");
    CHECK(p.source_plot_id == "o1");
    CHECK(p.extra["premise_id"] == "pr1");
    CHECK_FALSE(p.extra.contains("exceeds_max_words"));
    CHECK(p.word_count == 7);
    auto gw2 = testing::quiet_gateway();
    CHECK(to_json(generate_plot(kPremises[0], writer("w1"), gw2)) == to_json(p));
  }

  TEST_CASE("over-length generations are flagged and kept whole") {
    GenerationConfig c = writer("w1");
    c.max_output_words = 3;
    auto gw = testing::quiet_gateway();
    const auto p = generate_plot(kPremises[0], c, gw);
    CHECK(p.text == "w1 writes: a thief who steals time.");
    CHECK(p.extra["exceeds_max_words"] == true);
  }

  TEST_CASE("two premises by three generators") {
    const std::vector<GenerationConfig> configs = {writer("a"), writer("b"), writer("c")};
    auto gw = testing::quiet_gateway();
    const auto r = generate_batch(kPremises, configs, gw);
    CHECK(r.records().size() == 6);
    CHECK(r.gaps.empty());
    CHECK(r.cells[1][2]->id == "pr2@c");
    for (const auto& rec : r.records()) {
      CHECK(rec.generator_id.has_value());
      CHECK(rec.source_label == SourceLabel::Generated);
    }
  }

  TEST_CASE("a failing generator leaves a logged gap") {
    const std::vector<GenerationConfig> configs = {writer("a"), writer("b", true), writer("c")};
    auto gw = testing::quiet_gateway();
    const auto r = generate_batch(kPremises, configs, gw);
    CHECK(r.records().size() == 4);
    REQUIRE(r.gaps.size() == 2);
    CHECK(r.gaps[0].premise_id == "pr1");
    CHECK(r.gaps[0].generator_id == "b");
    CHECK_FALSE(r.cells[0][1].has_value());

    const std::vector<Premise> one = {kPremises[0]};
    CHECK(generate_batch(one, configs, gw).records().size() == 2);
  }

  TEST_CASE("batch results do not depend on scheduling") {
    std::vector<Premise> premises;
    for (int i = 0; i < 12; ++i) premises.push_back({"p" + std::to_string(i), "premise number " + std::to_string(i), std::nullopt});
    const std::vector<GenerationConfig> configs = {writer("a"), writer("b", true), writer("c")};
    auto g1 = testing::quiet_gateway(), g4 = testing::quiet_gateway();
    const auto serial = generate_batch(premises, configs, g1, 1);
    const auto parallel = generate_batch(premises, configs, g4, 4);
    std::vector<json> x, y;
    for (const auto& r : serial.records()) x.push_back(to_json(r));
    for (const auto& r : parallel.records()) y.push_back(to_json(r));
    CHECK(x == y);
    REQUIRE(serial.gaps.size() == parallel.gaps.size());
    for (std::size_t i = 0; i < serial.gaps.size(); ++i) CHECK(serial.gaps[i].premise_id == parallel.gaps[i].premise_id);
  }

  TEST_CASE("the detective premise replays the recorded session") {
    const auto dir = testing::kFixtures / "detective_session";
    GenerationConfig c;
    c.endpoint = gateway::mock_backend("hand-written-writer", gateway::load_mock_script(dir / "recording.json"));
    const auto premise = load_premises(dir / "premise.jsonl").at(0);
    auto gw = testing::quiet_gateway(false);
    const auto plot = generate_plot(premise, c, gw);
    const auto want = load_corpus(dir / "plot.jsonl").at(0);
    CHECK(jsonl::dump(to_json(plot)) == jsonl::dump(to_json(want)));
    CHECK(plot.text.find("blackmail") != std::string::npos);
    CHECK(plot.word_count > 250);  // long form, several paragraphs
  }
}
