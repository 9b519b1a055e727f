#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace plottwist::cli {

/// Runs one `plottwist` invocation; `args` excludes the program name.
/// Returns 0 on success, 1 on domain or data errors and 2 on configuration
/// or usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plottwist::cli
