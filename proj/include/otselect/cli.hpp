#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace otselect::cli {

// Stable exit codes.
enum ExitCode : int {
  kOk = 0,
  kIoOrValidation = 1,
  kUnknownMethod = 2,
  kInfeasibleBudget = 3,
};

// Runs one subcommand; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace otselect::cli
