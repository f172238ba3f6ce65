#pragma once

#include "abstain/core/types.hpp"

namespace abstain::core {

// Deterministic train/val/test partition. Each id is ranked by a keyed hash of
// (id, seed), so the split depends only on the id set and the seed, not on
// record order. Fractions are honored to within one record (floor).
SplitResult split_dataset(const std::vector<FeatureRecord>& records,
                          const SplitSpec& spec);

SplitResult split_ids(std::vector<std::string> ids, const SplitSpec& spec);

}  // namespace abstain::core
