#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace zscat::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDataError = 3,
  kNumericFailure = 4,
  kGradcheckFailure = 5,
};

// Entry point of the zscat tool; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace zscat::cli
