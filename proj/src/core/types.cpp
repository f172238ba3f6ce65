#include "abstain/core/types.hpp"

#include <cmath>

#include "abstain/common/error.hpp"
#include "abstain/common/strings.hpp"

namespace abstain::core {

ClassMap::ClassMap(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw ValidationError("class map needs at least 2 values");
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (!(values_[i - 1] < values_[i]))
      throw ValidationError("class map values must be strictly increasing");
  }
  if (values_.front() != 0.0) throw ValidationError("class map must start at 0");
  if (values_.back() != 1.0) throw ValidationError("class map must end at 1");
}

int ClassMap::discretize(double accuracy) const {
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (std::abs(accuracy - values_[c]) <= kTolerance) return static_cast<int>(c);
  }
  throw ValidationError("accuracy " + fmt_double(accuracy) + " not in class map");
}

bool ClassMap::contains(double accuracy) const {
  for (double v : values_) {
    if (std::abs(accuracy - v) <= kTolerance) return true;
  }
  return false;
}

std::string to_string(FeatureEncoding encoding) {
  return encoding == FeatureEncoding::kInlineJson ? "inline-json" : "packed-binary";
}

FeatureEncoding feature_encoding_from_string(const std::string& s) {
  if (s == "inline-json") return FeatureEncoding::kInlineJson;
  if (s == "packed-binary") return FeatureEncoding::kPackedBinary;
  throw ValidationError("unknown feature encoding: " + s);
}

}  // namespace abstain::core
