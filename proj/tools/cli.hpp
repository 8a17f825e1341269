#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace risk::cli {

inline constexpr const char* kToolVersion = "1.0.0";

/// Exit codes: 0 ok, 2 data error, 3 fit/convergence, 4 config, 5 statistical infeasibility.
enum ExitCode : int { kOk = 0, kDataError = 2, kFitError = 3, kConfigError = 4, kInfeasible = 5 };

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

} // namespace risk::cli
