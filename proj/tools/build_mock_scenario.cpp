// Regenerates the bundled mock scenario: build_mock_scenario <dir>
#include <iostream>

#include "plottwist/errors.hpp"
#include "plottwist/scenario.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: build_mock_scenario <output-dir>\n";
    return 2;
  }
  try {
    plottwist::scenario::write_mock_scenario(argv[1]);
  } catch (const plottwist::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
