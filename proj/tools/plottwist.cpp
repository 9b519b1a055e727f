#include <iostream>

#include "plottwist/cli.hpp"

int main(int argc, char** argv) {
  return plottwist::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
