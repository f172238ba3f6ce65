#include "abstain/metrics/vqa_accuracy.hpp"

#include <algorithm>
#include <cmath>

#include "abstain/common/error.hpp"
#include "abstain/common/strings.hpp"

namespace abstain::metrics {

double vqa_soft_accuracy(const std::string& candidate,
                         const std::vector<std::string>& human_answers,
                         const core::ClassMap& class_map) {
  if (human_answers.size() != 10)
    throw ValidationError("vqa_soft_accuracy expects exactly 10 human answers, got " +
                          std::to_string(human_answers.size()));
  double total = 0.0;
  for (std::size_t leave_out = 0; leave_out < human_answers.size(); ++leave_out) {
    int matches = 0;
    for (std::size_t i = 0; i < human_answers.size(); ++i) {
      if (i != leave_out && human_answers[i] == candidate) ++matches;
    }
    total += std::min(static_cast<double>(matches) / 3.0, 1.0);
  }
  const double raw = total / static_cast<double>(human_answers.size());
  // Snap the decimal artifacts of n/3 averaging onto the class grid.
  const int c = class_map.discretize(raw);
  return class_map.value(c);
}

}  // namespace abstain::metrics
