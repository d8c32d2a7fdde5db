#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "zscat/architectures.h"

namespace zscat {

inline constexpr double kGradcheckStep = 1e-5;
inline constexpr double kGradcheckTolerance = 1e-4;

// |analytic - numeric| / max(|analytic|, |numeric|, floor). The floor keeps
// near-zero components from turning roundoff into large ratios.
inline constexpr double kGradcheckFloor = 1e-6;
double relative_error(double analytic, double numeric);

struct BlockCheck {
  std::string name;
  std::size_t size = 0;
  double max_relative_error = 0.0;
};

struct GradcheckReport {
  Architecture arch = Architecture::kMeanPool;
  std::uint64_t seed = 0;
  std::vector<BlockCheck> blocks;  // parameter blocks, then "sentence"
  double max_relative_error() const;
  bool passed(double tolerance = kGradcheckTolerance) const;
};

struct GradcheckOptions {
  std::size_t embed_dim = 4;
  std::size_t hidden_dim = 5;
  std::size_t sequence_length = 6;
  // Test hook: perturbs the analytic classifier gradient so the check must
  // fail.
  bool corrupt_backward = false;
};

// Random model, sentence, tag and label from `seed`; compares backward()
// against central differences of bce_loss(forward()).
GradcheckReport run_gradcheck(Architecture arch, std::uint64_t seed,
                              const GradcheckOptions& options = {});

}  // namespace zscat
