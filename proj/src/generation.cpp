#include "plottwist/generation.hpp"

#include "plottwist/errors.hpp"
#include "plottwist/parallel.hpp"

namespace plottwist::generation {

namespace {

std::size_t count_slots(std::string_view tmpl) {
  std::size_t n = 0;
  for (auto pos = tmpl.find(kPremiseSlot); pos != std::string_view::npos;
       pos = tmpl.find(kPremiseSlot, pos + kPremiseSlot.size()))
    ++n;
  return n;
}

}  // namespace

void GenerationConfig::validate() const {
  endpoint.validate();
  if (count_slots(prompt_template) != 1)
    throw ConfigError("generation template for " + endpoint.model_id +
                      " must contain exactly one {premise} slot");
  if (max_output_words && *max_output_words == 0)
    throw ConfigError("max_output_words must be positive");
}

std::string render_generation_prompt(std::string_view prompt_template, const Premise& premise) {
  const auto pos = prompt_template.find(kPremiseSlot);
  if (pos == std::string_view::npos) throw ConfigError("generation template has no {premise} slot");
  std::string out(prompt_template.substr(0, pos));
  out += premise.text;
  out += prompt_template.substr(pos + kPremiseSlot.size());
  return out;
}

PlotRecord generate_plot(const Premise& premise, const GenerationConfig& config,
                         gateway::Gateway& gateway) {
  if (premise.text.empty()) throw DomainError("premise " + premise.id + " is empty");
  config.validate();
  const std::string prompt = render_generation_prompt(config.prompt_template, premise);
  const auto result = gateway.complete({config.endpoint, "", prompt});

  PlotRecord rec = PlotRecord::make(premise.id + "@" + config.endpoint.model_id, result.raw_text,
                                    SourceLabel::Generated);
  rec.generator_id = config.endpoint.model_id;
  rec.source_plot_id = premise.source_plot_id;
  rec.extra["premise_id"] = premise.id;
  if (config.max_output_words && rec.word_count > *config.max_output_words)
    rec.extra["exceeds_max_words"] = true;
  return rec;
}

std::vector<PlotRecord> BatchResult::records() const {
  std::vector<PlotRecord> out;
  for (const auto& row : cells)
    for (const auto& cell : row)
      if (cell) out.push_back(*cell);
  return out;
}

BatchResult generate_batch(std::span<const Premise> premises,
                           std::span<const GenerationConfig> configs, gateway::Gateway& gateway,
                           int jobs) {
  if (configs.empty()) throw ConfigError("generate_batch needs at least one generator");
  for (const auto& c : configs) c.validate();

  const std::size_t width = configs.size();
  BatchResult out;
  out.cells.assign(premises.size(), std::vector<std::optional<PlotRecord>>(width));
  std::vector<std::string> errors(premises.size() * width);

  parallel_for(premises.size() * width, jobs, [&](std::size_t k) {
    const std::size_t p = k / width;
    const std::size_t c = k % width;
    try {
      out.cells[p][c] = generate_plot(premises[p], configs[c], gateway);
    } catch (const TransportError& e) {
      errors[k] = e.what();
    }
  });

  for (std::size_t k = 0; k < errors.size(); ++k)
    if (!out.cells[k / width][k % width])
      out.gaps.push_back({premises[k / width].id, configs[k % width].endpoint.model_id, errors[k]});
  return out;
}

}  // namespace plottwist::generation
