#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sphcode::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kDomain = 1, kUsage = 2, kBudget = 3 };

/// Runs one subcommand; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "pi/3", "2pi/3", "2*pi/3", "pi" or a plain number.
double parse_angle(const std::string& text);

}  // namespace sphcode::cli
