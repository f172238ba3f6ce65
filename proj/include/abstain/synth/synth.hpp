#pragma once

#include <cstdint>
#include <vector>

#include "abstain/core/types.hpp"

namespace abstain::synth {

// Gaussian class-signal generator. Each sample draws a class c from the
// prior and sets h = signal*mu_c + noise*eps with per-class orthonormal unit
// directions mu_c; q and a are pure noise. The class posterior given h is
// closed-form, so every record carries a Bayes-optimal oracle confidence that
// upper-bounds any trained selector.
struct SynthConfig {
  int n_samples = 1000;
  int d_h = 64;
  int d_q = 16;
  int d_a = 16;
  core::ClassMap class_map;
  // Defaults mirror a mostly-correct answer distribution with few negatives.
  std::vector<double> prior{0.1, 0.05, 0.05, 0.2, 0.6};
  double signal_strength = 2.5;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  core::FeatureEncoding encoding = core::FeatureEncoding::kPackedBinary;

  void validate() const;
};

struct SynthResult {
  core::Dataset dataset;
  std::vector<double> oracle;  // posterior expected accuracy per record
};

SynthResult generate_synthetic(const SynthConfig& config);

}  // namespace abstain::synth
