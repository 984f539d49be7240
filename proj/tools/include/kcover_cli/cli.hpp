#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kcover::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageOrIo = 1,
  kStalled = 2,
  kBudgetExhausted = 3,
};

/// Runs the kcover command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kcover::cli
