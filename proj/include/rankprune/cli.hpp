#pragma once
// Command-line front end. Exit codes:
//   0 success, 2 input error, 3 degenerate estimation, 4 infeasible config.

#include <iosfwd>
#include <string>
#include <vector>

#include "rankprune/errors.hpp"

namespace rankprune::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitInfeasible = 4;

int exit_code_for(ErrorCode code);

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rankprune::cli
