#pragma once

#include "abstain/core/types.hpp"
#include "abstain/selector/selector.hpp"

namespace abstain::selector {

// Mini-batch training on mean focal loss with an Adam update rule. Fully
// deterministic under a fixed seed: seeded init, seeded shuffle order, fixed
// reduction order, single-threaded. Returns the parameters of the epoch with
// the best validation metric, not the last epoch.
std::pair<SelectorModel, TrainReport> train_selector(
    const std::vector<core::FeatureRecord>& train_records,
    const std::vector<core::FeatureRecord>& val_records, const TrainConfig& config,
    const core::ClassMap& class_map);

}  // namespace abstain::selector
