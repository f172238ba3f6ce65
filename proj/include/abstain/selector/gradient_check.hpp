#pragma once

#include "abstain/core/types.hpp"
#include "abstain/selector/selector.hpp"

namespace abstain::selector {

struct GradientCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  long long entries_checked = 0;
};

// Compares analytic focal-loss gradients against central finite differences
// over the model parameters, in 64-bit arithmetic. Relative error uses
// |g_a - g_fd| / max(1e-8, |g_a| + |g_fd|). With max_entries_per_tensor = 0
// every parameter is perturbed; otherwise a deterministic evenly strided
// subset per tensor.
GradientCheckResult gradient_check(const SelectorModel& model,
                                   const core::FeatureRecord& record, double epsilon,
                                   int max_entries_per_tensor = 0);

}  // namespace abstain::selector
