#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace textailor::cli {

/// Runs the command line `args` (without the program name). Returns the
/// process exit code; usage errors print help to `err` and return 2.
int cli_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace textailor::cli
