// Records a premise or generation session into a fingerprint-keyed script
// that a mock endpoint can replay without the original backend.
//
//   record_session premise  <plots.jsonl>    <endpoint.json>   <recording.json> <premises.jsonl>
//   record_session generate <premises.jsonl> <generation.json> <recording.json> <plots.jsonl>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "plottwist/config.hpp"
#include "plottwist/curation.hpp"
#include "plottwist/domain.hpp"
#include "plottwist/errors.hpp"
#include "plottwist/gateway.hpp"
#include "plottwist/generation.hpp"
#include "plottwist/mock.hpp"

using namespace plottwist;

int main(int argc, char** argv) {
  if (argc != 6) {
    std::cerr << "usage: record_session premise|generate <input.jsonl> <endpoint.json> <recording.json> <out.jsonl>\n";
    return 2;
  }
  const std::string mode = argv[1];
  const std::filesystem::path input = argv[2], config_path = argv[3], recording = argv[4], out = argv[5];
  try {
    auto recorder = std::make_shared<gateway::SessionRecorder>();
    gateway::Gateway gw({.cache_dir = std::nullopt, .use_cache = false, .sleep = {}});
    const auto doc = config::read_json_file(config_path);
    if (mode == "premise") {
      const auto endpoint = gateway::record_session(config::parse_endpoint(doc, config_path.parent_path()), recorder);
      std::vector<Premise> premises;
      for (const auto& plot : load_corpus(input)) premises.push_back(curation::generate_premise(plot, endpoint, gw));
      save_premises(out, premises);
    } else if (mode == "generate") {
      auto cfg = config::parse_generation_config(doc, config_path.parent_path());
      cfg.endpoint = gateway::record_session(cfg.endpoint, recorder);
      std::vector<PlotRecord> plots;
      for (const auto& premise : load_premises(input)) plots.push_back(generation::generate_plot(premise, cfg, gw));
      save_corpus(out, plots);
    } else {
      std::cerr << "unknown mode " << mode << "\n";
      return 2;
    }
    recorder->save(recording);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
