#include "plottwist/scenario.hpp"

#include <cctype>
#include <map>
#include <set>

#include "plottwist/domain.hpp"
#include "plottwist/judge.hpp"
#include "plottwist/jsonl.hpp"

namespace plottwist::scenario {

namespace {

Grade S(int g) { return {Grade::Kind::Score, g}; }
const Grade kFail{Grade::Kind::GenerationFails, 0};
const Grade kUnratable{Grade::Kind::Unratable, 0};

// Grade the judge assigns to unratable candidates.
constexpr int kUnratableJudgeGrade = 700;
// Rater 5 times out on every prompt carrying this grade, leaving four voters.
constexpr int kFlakyRaterGrade = 800;
// The judge's first Pacing report for this grade is missing its TOTAL line.
constexpr int kFlakyJudgeGrade = 860;

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string grade_token(const Grade& g) {
  if (g.kind == Grade::Kind::Unratable) return "[grade unrated]";
  return "[grade " + std::to_string(g.hundredths) + "]";
}

}  // namespace

const std::vector<Row>& mock_rows() {
  using P = PremiseMode;
  static const std::vector<Row> rows = {
      {"mv01", "The Lantern Keeper", "a retired lighthouse keeper",
       "who discovers smugglers using his darkened tower", "on a fog-bound Hebridean island", 8.8, "gsat",
       860, P::Ok, S(740), S(860), S(800), "pair"},
      {"mv02", "Salt and Iron", "a young blacksmith's apprentice",
       "who forges a blade for the rebel she once betrayed", "in a mountain kingdom under occupation", 8.6,
       "gsat", 840, P::Ok, S(780), S(810), S(870), "pair"},
      {"mv03", "Night Shift at Kestrel Row", "an overworked emergency nurse",
       "who suspects a colleague of stealing medicine", "in a failing city hospital", 8.4, "gsat", 820, P::Ok,
       S(700), S(850), S(790), "pair"},
      {"mv04", "The Cartographer's Debt", "a disgraced mapmaker",
       "who must chart a pass no one has survived to repay a gambling debt",
       "in the frozen north of a crumbling empire", 8.2, "gsat", 850, P::Ok, S(760), S(900), S(850), "pair"},
      {"mv05", "Second Violin", "an overlooked orchestra violinist",
       "who is offered the solo after the star performer vanishes", "in 1930s Vienna", 8.1, "gsat", 830, P::Ok,
       S(800), S(850), S(720), "pair"},
      {"mv06", "Harvest Moon Motel", "a widowed motel owner",
       "who shelters a runaway wanted by both the police and a cult", "on a desert highway in Nevada", 7.9,
       "gsat", 810, P::Ok, S(750), S(880), kFail, "pair"},
      {"mv07", "Glass Orchard", "a botanist recovering from a breakdown",
       "who inherits a greenhouse that seems to grow memories", "in rural Oregon", 7.7, "gsat", 800, P::Ok,
       S(890), S(860), S(820), "best_not_frontier"},
      {"mv08", "The Quiet Referee", "a soft-spoken football referee",
       "who is pressured to fix the final match of the season", "in a small Portuguese league", 7.5, "gsat",
       820, P::Ok, S(830), S(810), S(750), "best_not_frontier"},
      {"mv09", "Paper Tigers", "two rival origami artists",
       "who are forced to collaborate on a museum installation", "in contemporary Osaka", 7.3, "gsat", 790,
       P::Ok, S(790), S(720), S(760), "best_not_frontier"},
      {"mv10", "Last Ferry to Marrow Point", "a ferry captain on his final voyage",
       "who must decide whether to report a passenger's confession", "on a stormy northern sound", 7.1, "gsat",
       800, P::Ok, S(700), S(800), S(740), "threshold"},
      {"mv11", "Borrowed Thunder", "a struggling rainmaker",
       "who fakes a miracle and is then asked to repeat it", "in a drought-stricken Depression-era town", 6.9,
       "gsat", 780, P::Ok, S(680), S(790), S(720), "threshold"},
      {"mv12", "The Understudy Heist", "a theater understudy",
       "who is recruited to stand in for a jewel thief's accomplice", "during opening night on Broadway", 6.7,
       "gsat", 770, P::Ok, S(710), S(760), S(790), "threshold"},
      {"mv13", "Radio Silence", "a late-night radio host",
       "who takes calls from a listener predicting local disasters", "in a snowed-in mining town", 6.5,
       "razzie", 740, P::Ok, S(780), S(840), S(810), "margin"},
      {"mv14", "Copper Kingdom", "a teenage skateboarder",
       "who learns that the town's copper mine is poisoning the river", "in 1990s Arizona", 6.3, "razzie", 730,
       P::Ok, S(820), S(860), S(700), "margin"},
      {"mv15", "Ashfall", "a volcanologist on sabbatical",
       "who ignores the warning signs to save her marriage", "on a resort island in the Pacific", 6.1,
       "razzie", 720, P::Ok, S(730), S(840), S(800), "margin"},
      {"mv16", "The Bishop's Gambit", "a chess prodigy turned hustler",
       "who is blackmailed into throwing a televised match", "in 1970s Reykjavik", 5.8, "razzie", 710, P::Ok,
       S(700), S(870), S(870), "margin"},
      {"mv17", "Honey Trap Junction", "a beekeeper turned reluctant informant",
       "who is asked to spy on her own brother", "in a border town in rural Texas", 5.2, "razzie", 700, P::Ok,
       kFail, S(890), S(700), "base_missing"},
      {"mv18", "Velvet Static", "a washed-up synth-pop singer",
       "who attempts a comeback on a televised talent contest", "in 1980s Manchester", 4.6, "razzie", 720,
       P::Fails, S(700), S(700), S(700), "premise_failed"},
      {"mv19", "Parlor Games", "a spiritualist medium",
       "who is hired to expose a rival as a fraud", "in Victorian Edinburgh", 4.1, "razzie", 690, P::Ok,
       kUnratable, S(880), S(700), "scoring_failed"},
      {"mv20", "Tin Crown", "a rodeo clown",
       "who must protect a champion rider from a rigged bull", "at a small-town Montana rodeo", 3.5, "razzie",
       710, P::FailsOnce, S(720), S(780), S(840), "pair"},
  };
  return rows;
}

std::string premise_text(const Row& row) {
  return row.protagonist + " " + row.conflict + " " + row.setting + ".";
}

std::string candidate_text(const Row& row, const std::string& generator_id, const Grade& grade) {
  const std::string token = grade_token(grade);
  if (generator_id == kBaseId)
    return capitalized(row.protagonist) + " " + row.conflict + " " + row.setting +
           ". Things get difficult and the hero has to choose what matters most. In the end the truth "
           "comes out and life goes on. " + token;
  if (generator_id == kFrontierA)
    return row.title + " opens quietly: " + row.protagonist + " " + row.conflict + " " + row.setting +
           ". The first act builds trust with a wary ally, the second turns that trust into leverage, and "
           "the finale forces a public reckoning that reframes everything before it. " + token;
  return "Set " + row.setting + ", the story follows " + row.protagonist + " " + row.conflict +
         ". A midpoint reversal exposes a secret kept for years, and the climax trades spectacle for a "
         "costly act of honesty. " + token;
}

namespace {

std::string original_text(const Row& row) {
  return row.title + ". " + capitalized(row.protagonist) + " " + row.conflict + " " + row.setting +
         ". As the pressure mounts, old loyalties fracture and every choice carries a cost. The story "
         "closes on a decision that cannot be undone. " + grade_token(S(row.original_grade));
}

json fail(const std::string& why) { return {{"fail", why}}; }

json rule(std::string name, std::vector<std::string> all, json respond) {
  json r;
  r["name"] = std::move(name);
  r["all"] = std::move(all);
  if (respond.is_array()) r["sequence"] = std::move(respond);
  else r["respond"] = std::move(respond);
  return r;
}

std::string rater_reply(int rater, const std::string& field, int value) {
  const std::string v = std::to_string(value);
  switch (rater) {
    case 1: return "{\"" + field + "\": " + v + "}";
    case 2: return "```json\n{\"" + field + "\": " + v + "}\n```";
    case 3: return "Rating: {\"" + field + "\": " + v + "}";
    case 4: return "{\"" + field + "\":" + v + "}";
    default: return "{ \"" + field + "\": " + v + " }";
  }
}

// Splits the summed (positive - negative) budget of a grade over the 25
// (aspect, rater) slots so that the ensemble's overall reward is exactly
// grade / 100: overall = 5 + sum / 50.
int slot_difference(int grade, std::size_t aspect, int rater) {
  const int budget = (grade - 500) / 2;
  const int slot = static_cast<int>(aspect) * kRaters + (rater - 1);
  return budget / 25 + (slot < budget % 25 ? 1 : 0);
}

std::set<int> score_grades() {
  std::set<int> out;
  for (const Row& r : mock_rows()) {
    out.insert(r.original_grade);
    for (const Grade* g : {&r.base, &r.frontier_a, &r.frontier_b})
      if (g->kind == Grade::Kind::Score) out.insert(g->hundredths);
  }
  return out;
}

json rater_script(int rater) {
  json rules = json::array();
  auto add_grade = [&](const std::string& token, const std::string& tag, auto difference) {
    for (Aspect a : kAllAspects) {
      const std::string field(field_name(a));
      const std::optional<int> d = difference(index_of(a));
      for (bool positive : {true, false}) {
        const std::string name = tag + "-" + field + (positive ? "-pos" : "-neg");
        std::vector<std::string> all{token, "Include only " + field + ".",
                                     positive ? "Field Definition (Positive" : "Field Definition (Negative"};
        json reply;
        if (!d) {
          reply = "I can't judge the " + std::string(display_name(a)) + " of this one.";
        } else {
          const int neg = (10 - *d) / 2;
          reply = rater_reply(rater, field, positive ? neg + *d : neg);
        }
        rules.push_back(rule(name, std::move(all), std::move(reply)));
      }
    }
  };
  for (int g : score_grades()) {
    if (g == kFlakyRaterGrade && rater == kRaters) {
      rules.push_back(rule("g" + std::to_string(g) + "-timeout", {grade_token(S(g))},
                           fail("HTTP 504 Gateway Timeout")));
      continue;
    }
    add_grade(grade_token(S(g)), "g" + std::to_string(g),
              [&](std::size_t aspect) -> std::optional<int> { return slot_difference(g, aspect, rater); });
  }
  add_grade(grade_token(kUnratable), "unrated", [](std::size_t aspect) -> std::optional<int> {
    if (aspect == index_of(Aspect::Pacing)) return std::nullopt;
    return 6;
  });
  return {{"rules", std::move(rules)}};
}

std::string judge_report(Aspect a, int grade, bool with_total) {
  static constexpr PerAspect<int> kOffsetTenths = {2, -1, 0, 1, -2};
  const int tenths = std::clamp(grade / 10 + kOffsetTenths[index_of(a)], 0, 100);
  const auto& spec = judge::rubric(a);
  std::string out = "Assessment of " + std::string(display_name(a)) + " for the submitted plot.\n\n";
  for (std::size_t i = 0; i < judge::kCriteria; ++i) {
    const int c = tenths / 10 + (static_cast<int>(i) < tenths % 10 ? 1 : 0);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%d.%d", c / 10, c % 10);
    out += "**" + std::to_string(i + 1) + ". " + std::string(spec.criteria[i]) + ":** " + buf + "\n";
  }
  if (with_total) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%d.%d", tenths / 10, tenths % 10);
    out += "\n**TOTAL: " + std::string(buf) + "/10**\n";
  }
  return out;
}

json judge_script() {
  json rules = json::array();
  std::vector<std::pair<std::string, int>> tokens;
  for (int g : score_grades()) tokens.emplace_back(grade_token(S(g)), g);
  tokens.emplace_back(grade_token(kUnratable), kUnratableJudgeGrade);
  for (const auto& [token, g] : tokens) {
    for (Aspect a : kAllAspects) {
      const std::string marker(judge::rubric(a).criteria[0]);
      const std::string name = "g" + std::to_string(g) + "-" + std::string(field_name(a));
      if (g == kFlakyJudgeGrade && a == Aspect::Pacing) {
        rules.push_back(rule(name + "-flaky", {token, marker},
                             json::array({judge_report(a, g, false), judge_report(a, g, true)})));
      } else {
        rules.push_back(rule(name, {token, marker}, judge_report(a, g, true)));
      }
    }
  }
  return {{"rules", std::move(rules)}};
}

json premise_script() {
  json rules = json::array();
  for (const Row& r : mock_rows()) {
    json reply;
    switch (r.premise) {
      case PremiseMode::Ok: reply = premise_text(r); break;
      case PremiseMode::Fails: reply = fail("HTTP 502 Bad Gateway"); break;
      case PremiseMode::FailsOnce: reply = json::array({fail("HTTP 429 Too Many Requests"), premise_text(r)}); break;
    }
    rules.push_back(rule(r.id, {r.title}, std::move(reply)));
  }
  return {{"rules", std::move(rules)}};
}

json generator_script(const std::string& generator_id, Grade Row::*column) {
  json rules = json::array();
  for (const Row& r : mock_rows()) {
    if (r.premise == PremiseMode::Fails) continue;
    const Grade& g = r.*column;
    json reply = g.kind == Grade::Kind::GenerationFails ? fail("HTTP 503 Service Unavailable")
                                                        : json(candidate_text(r, generator_id, g));
    rules.push_back(rule(r.id, {r.protagonist}, std::move(reply)));
  }
  return {{"rules", std::move(rules)}};
}

std::string jsonl_of(const std::vector<const Row*>& rows) {
  std::string out;
  for (const Row* r : rows) {
    PlotRecord p = PlotRecord::make(r->id, original_text(*r),
                                    r->label == "gsat" ? SourceLabel::GSAT : SourceLabel::Razzie);
    p.external_rating = r->rating;
    out += jsonl::dump(to_json(p)) + "\n";
  }
  return out;
}

json endpoint(const std::string& id, const std::string& script) {
  return {{"model_id", id}, {"script", script}, {"max_retries", 2}};
}

}  // namespace

std::vector<File> mock_scenario_files() {
  std::vector<File> files;
  std::vector<const Row*> all, gsat, razzie;
  for (const Row& r : mock_rows()) {
    all.push_back(&r);
    (r.label == "gsat" ? gsat : razzie).push_back(&r);
  }
  files.push_back({"corpus.jsonl", jsonl_of(all)});
  files.push_back({"gsat.jsonl", jsonl_of(gsat)});
  files.push_back({"razzie.jsonl", jsonl_of(razzie)});

  const std::string tmpl = "Generate a movie plot that follows {premise}";
  json generators;
  generators["prompt_template"] = tmpl;
  generators["premise"] = endpoint(kPremiseId, "scripts/premise.json");
  generators["base"] = endpoint(kBaseId, "scripts/gen-base.json");
  generators["frontier"] = json::array({endpoint(kFrontierA, "scripts/gen-frontier-a.json"),
                                        endpoint(kFrontierB, "scripts/gen-frontier-b.json")});
  files.push_back({"generators.json", jsonl::pretty(generators)});

  json ensemble;
  ensemble["endpoints"] = json::array();
  for (int i = 1; i <= kRaters; ++i)
    ensemble["endpoints"].push_back(endpoint("mock-rater-" + std::to_string(i),
                                             "scripts/rater-" + std::to_string(i) + ".json"));
  files.push_back({"ensemble.json", jsonl::pretty(ensemble)});

  files.push_back({"judge.json", jsonl::pretty({{"endpoint", endpoint(kJudgeId, "scripts/judge.json")}})});

  json models;
  models["prompt_template"] = tmpl;
  models["max_output_words"] = 4000;
  models["endpoints"] = json::array({endpoint(kBaseId, "scripts/gen-base.json")});
  files.push_back({"models.json", jsonl::pretty(models)});

  files.push_back({"scripts/premise.json", jsonl::pretty(premise_script())});
  files.push_back({"scripts/gen-base.json", jsonl::pretty(generator_script(kBaseId, &Row::base))});
  files.push_back({"scripts/gen-frontier-a.json", jsonl::pretty(generator_script(kFrontierA, &Row::frontier_a))});
  files.push_back({"scripts/gen-frontier-b.json", jsonl::pretty(generator_script(kFrontierB, &Row::frontier_b))});
  for (int i = 1; i <= kRaters; ++i)
    files.push_back({"scripts/rater-" + std::to_string(i) + ".json", jsonl::pretty(rater_script(i))});
  files.push_back({"scripts/judge.json", jsonl::pretty(judge_script())});

  json expected;
  expected["plots"] = mock_rows().size();
  std::map<std::string, int> counts;
  json outcomes = json::object();
  for (const Row& r : mock_rows()) {
    ++counts[r.expected];
    outcomes[r.id] = r.expected;
  }
  expected["pairs"] = counts["pair"];
  json rejections = json::object();
  for (const auto& [name, n] : counts)
    if (name != "pair") rejections[name] = n;
  expected["rejections"] = std::move(rejections);
  expected["outcomes"] = std::move(outcomes);
  files.push_back({"expected.json", jsonl::pretty(expected)});
  return files;
}

void write_mock_scenario(const std::filesystem::path& dir) {
  for (const File& f : mock_scenario_files()) jsonl::write_text(dir / f.path, f.content);
}

}  // namespace plottwist::scenario
