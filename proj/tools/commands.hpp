#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lenspec::cli {

enum ExitCode { kOk = 0, kUsage = 1, kIncomplete = 2, kViolation = 3, kPrecision = 4 };

/// Runs the command line given as arguments (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lenspec::cli
