#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fpp::cli {

/// Runs one command line (args[0] is the program name). Reports go to
/// `out` (or the --out file), structured errors to `err`. Returns the
/// process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fpp::cli
