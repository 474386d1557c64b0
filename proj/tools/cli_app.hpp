// Command-line front end: run, compare, diagnose and presets.
//
// Exit codes: 0 success, 1 validation failure, 2 divergence or failed
// stability verdict, 3 I/O error.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kfmrac::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kDivergence = 2,
  kIo = 3,
};

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace kfmrac::cli
