#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qubench::cli {

enum ExitCode { kOk = 0, kUsage = 1, kRuntime = 2 };

/// Runs one command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qubench::cli
