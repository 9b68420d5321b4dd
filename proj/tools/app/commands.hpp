#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace augwm::app {

/// `args` excludes the program name. Exit codes: 0 success, 1 invalid input
/// or configuration, 2 runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace augwm::app
