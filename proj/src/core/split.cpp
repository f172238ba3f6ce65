#include "abstain/core/split.hpp"

#include <algorithm>

#include "abstain/common/error.hpp"
#include "abstain/common/hash.hpp"

namespace abstain::core {

SplitResult split_ids(std::vector<std::string> ids, const SplitSpec& spec) {
  if (ids.empty()) throw ValidationError("cannot split an empty dataset");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ValidationError("train_fraction must be in (0,1)");
  if (!(spec.val_fraction > 0.0 && spec.val_fraction < 1.0))
    throw ValidationError("val_fraction must be in (0,1)");
  if (spec.train_fraction + spec.val_fraction > 1.0 + 1e-12)
    throw ValidationError("fractions exceed 1");

  std::sort(ids.begin(), ids.end());
  std::stable_sort(ids.begin(), ids.end(),
                   [&](const std::string& a, const std::string& b) {
                     return keyed_hash(a, spec.seed) < keyed_hash(b, spec.seed);
                   });

  const std::size_t n = ids.size();
  const auto n_train =
      static_cast<std::size_t>(spec.train_fraction * static_cast<double>(n) + 1e-9);
  auto n_val =
      static_cast<std::size_t>(spec.val_fraction * static_cast<double>(n) + 1e-9);
  n_val = std::min(n_val, n - n_train);

  SplitResult result;
  result.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  result.val_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                        ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  result.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
  return result;
}

SplitResult split_dataset(const std::vector<FeatureRecord>& records,
                          const SplitSpec& spec) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const FeatureRecord& rec : records) ids.push_back(rec.id);
  return split_ids(std::move(ids), spec);
}

}  // namespace abstain::core
