#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scatterlab::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure, 1 anything else.
enum ExitCode : int { kOk = 0, kInternal = 1, kConfigError = 2, kNumericalError = 3 };

/// Runs one subcommand. args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace scatterlab::cli
