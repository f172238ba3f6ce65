// Test-only brute-force oracles, written independently of the library code
// they check. Everything here favors the obvious O(N^2) enumeration over
// cleverness.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "abstain/common/rng.hpp"
#include "abstain/metrics/metrics.hpp"

namespace oracles {

using abstain::metrics::RiskMode;
using abstain::metrics::ScoredSample;

struct CovRisk {
  double coverage = 0.0;
  double risk = 0.0;
  std::size_t answered = 0;
};

inline CovRisk stats_at(const std::vector<ScoredSample>& samples, double threshold,
                        RiskMode mode = RiskMode::kSoft) {
  CovRisk out;
  double acc = 0.0;
  std::size_t wrong = 0;
  for (const ScoredSample& s : samples) {
    if (s.confidence >= threshold) {
      ++out.answered;
      acc += s.accuracy;
      if (s.accuracy == 0.0) ++wrong;
    }
  }
  out.coverage = static_cast<double>(out.answered) / static_cast<double>(samples.size());
  if (out.answered > 0) {
    out.risk = mode == RiskMode::kSoft
                   ? 1.0 - acc / static_cast<double>(out.answered)
                   : static_cast<double>(wrong) / static_cast<double>(out.answered);
  }
  return out;
}

// The N+1 threshold positions: every sample's confidence plus one sentinel
// that answers nothing.
inline std::vector<double> threshold_positions(const std::vector<ScoredSample>& samples) {
  std::vector<double> positions;
  for (const ScoredSample& s : samples) positions.push_back(s.confidence);
  double max_conf = positions.front();
  for (double v : positions) max_conf = std::max(max_conf, v);
  positions.push_back(max_conf + 1.0);
  return positions;
}

inline double coverage_at_risk(const std::vector<ScoredSample>& samples,
                               double max_risk, RiskMode mode = RiskMode::kSoft) {
  double best = 0.0;
  for (double t : threshold_positions(samples)) {
    const CovRisk cr = stats_at(samples, t, mode);
    if (cr.answered == 0) continue;
    if (cr.risk <= max_risk && cr.coverage > best) best = cr.coverage;
  }
  return best;
}

inline double phi_at(const std::vector<ScoredSample>& samples, double threshold,
                     double cost) {
  double total = 0.0;
  for (const ScoredSample& s : samples) {
    if (s.confidence < threshold) continue;
    total += s.accuracy > 0.0 ? 100.0 * s.accuracy : -cost;
  }
  return total / static_cast<double>(samples.size());
}

struct SweepPick {
  double threshold = 0.0;
  double phi = 0.0;
};

inline SweepPick sweep(const std::vector<ScoredSample>& samples, double cost) {
  // Candidates: each distinct confidence plus sentinels on both sides,
  // visited in ascending order so ties resolve toward more abstention.
  std::vector<double> candidates;
  for (const ScoredSample& s : samples) candidates.push_back(s.confidence);
  // insertion sort: keep the oracle free of the library's sort/tie choices
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    double v = candidates[i];
    std::size_t j = i;
    while (j > 0 && candidates[j - 1] > v) {
      candidates[j] = candidates[j - 1];
      --j;
    }
    candidates[j] = v;
  }
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  candidates.insert(candidates.begin(), candidates.front() - 1.0);
  candidates.push_back(candidates.back() + 1.0);

  SweepPick best{candidates.front(), -1e300};
  for (double t : candidates) {
    const double phi = phi_at(samples, t, cost);
    if (phi >= best.phi) best = {t, phi};
  }
  return best;
}

// Risk-at-coverage trapezoid by repeated max extraction (no std::sort), with
// the k=1 risk extended to coverage zero.
inline double auc_100(std::vector<ScoredSample> samples, RiskMode mode = RiskMode::kSoft) {
  const std::size_t n = samples.size();
  std::vector<bool> used(n, false);
  double acc_sum = 0.0;
  std::size_t wrong = 0;
  double auc = 0.0;
  double prev_cov = 0.0, prev_risk = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      if (pick == n || samples[i].confidence > samples[pick].confidence ||
          (samples[i].confidence == samples[pick].confidence &&
           samples[i].id < samples[pick].id))
        pick = i;
    }
    used[pick] = true;
    acc_sum += samples[pick].accuracy;
    if (samples[pick].accuracy == 0.0) ++wrong;
    const double cov = static_cast<double>(k) / static_cast<double>(n);
    const double risk = mode == RiskMode::kSoft
                            ? 1.0 - acc_sum / static_cast<double>(k)
                            : static_cast<double>(wrong) / static_cast<double>(k);
    if (k == 1) prev_risk = risk;
    auc += (cov - prev_cov) * 0.5 * (risk + prev_risk);
    prev_cov = cov;
    prev_risk = risk;
  }
  return 100.0 - 100.0 * auc;
}

// Random instances; confidences may collide on a coarse grid to exercise ties.
inline std::vector<ScoredSample> random_samples(abstain::Rng& rng, std::size_t n,
                                                bool grid_confidences = false) {
  static const double kAccuracies[] = {0.0, 0.3, 0.6, 0.9, 1.0};
  std::vector<ScoredSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double conf = rng.uniform01();
    if (grid_confidences) conf = std::round(conf * 16.0) / 16.0;
    samples.push_back({"s" + std::to_string(i), conf,
                       kAccuracies[rng.index(5)]});
  }
  return samples;
}

}  // namespace oracles
