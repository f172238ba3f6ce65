#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "abstain/scores.hpp"

namespace abstain::ensemble {

// Ordered cascade of score sources. Stage k mixes the running accumulator
// with source k+1: acc <- (1-w_k)*acc + w_k*next. One weight per stage,
// 0.5 by default, which makes the four-source cascade the progressive
// pairwise average MLP -> +T -> +P -> +L.
struct FusionPlan {
  std::vector<std::string> sources;
  std::vector<double> stage_weights;  // size sources.size()-1

  static FusionPlan default_plan();
  static FusionPlan load_json(const std::filesystem::path& path);
  void save_json(const std::filesystem::path& path) const;
  void validate() const;
};

// (1-w)*s1 + w*s2; inputs and weight must lie in [0,1].
double fuse_pair(double s1, double s2, double w);

// Applies the cascade left to right across the named columns of the score
// set. A missing source column or misaligned id is a hard error.
std::vector<double> fuse_cascade(const ScoreSet& scores, const FusionPlan& plan);

// Per-source linear weights from expanding the cascade; they sum to 1 and
// reproduce fuse_cascade as a weighted sum.
std::vector<double> effective_weights(const FusionPlan& plan);

}  // namespace abstain::ensemble
