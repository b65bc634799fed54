#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coliee {

/// Runs one CLI invocation. `args` excludes the program name. Returns 0 on
/// success, 1 on a stage failure, 2 on a usage error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coliee
