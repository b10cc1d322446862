#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sodcal::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;
inline constexpr int kNumericFailure = 3;

// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace sodcal::cli
