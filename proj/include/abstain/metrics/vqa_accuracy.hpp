#pragma once

#include <string>
#include <vector>

#include "abstain/core/types.hpp"

namespace abstain::metrics {

// Graded agreement with 10 human answers: the average over the 10
// leave-one-out answer subsets of min(#matches-in-subset / 3, 1), snapped to
// the nearest class-map value. Strings are compared verbatim; callers
// normalize (lowercase, trim) beforehand.
double vqa_soft_accuracy(const std::string& candidate,
                         const std::vector<std::string>& human_answers,
                         const core::ClassMap& class_map = core::ClassMap());

}  // namespace abstain::metrics
