#pragma once

#include <string>
#include <vector>

#include "abstain/core/types.hpp"

namespace abstain::metrics {

struct ScoredSample {
  std::string id;
  double confidence = 0.0;  // in [0,1]
  double accuracy = 0.0;    // in [0,1]
};

// Risk over the answered set: soft uses 1 - mean accuracy, binarized uses the
// fraction of answered samples with accuracy exactly 0.
enum class RiskMode { kSoft, kBinarized };

struct RiskCoveragePoint {
  double threshold = 0.0;
  double coverage = 0.0;
  double risk = 0.0;
};

struct SweepResult {
  double threshold = 0.0;
  double phi = 0.0;
};

struct EvaluationReport {
  std::vector<RiskCoveragePoint> curve;
  double auc100 = 0.0;
  std::vector<std::pair<double, double>> cov_at;  // (risk budget, coverage)
  double phi_c = 0.0;
  double chosen_threshold = 0.0;
  double cost = 0.0;
  RiskMode risk_mode = RiskMode::kSoft;
  std::size_t n_samples = 0;
};

void validate_samples(const std::vector<ScoredSample>& samples);

// One point per threshold: answered = {confidence >= t}. A threshold with
// empty coverage records risk 0.
std::vector<RiskCoveragePoint> risk_coverage_curve(
    const std::vector<ScoredSample>& samples, const std::vector<double>& thresholds,
    RiskMode mode = RiskMode::kSoft);

// All distinct confidence values plus sentinels below the minimum and above
// the maximum; ascending.
std::vector<double> candidate_thresholds(const std::vector<ScoredSample>& samples);

// 100 minus the area under the risk-coverage step curve, in percent. Samples
// are ranked by descending confidence (ties by ascending id); the curve is
// evaluated at coverages k/N and integrated by trapezoid with the k=1 risk
// extended to coverage 0. Higher is better.
double auc_100(const std::vector<ScoredSample>& samples, RiskMode mode = RiskMode::kSoft);

// Maximum coverage over candidate thresholds whose risk stays within
// max_risk; 0 when no threshold qualifies.
double coverage_at_risk(const std::vector<ScoredSample>& samples, double max_risk,
                        RiskMode mode = RiskMode::kSoft);

// Effective reliability, scaled x100: an answered sample earns 100*accuracy
// when accuracy > 0 and pays -cost when accuracy is 0; abstentions earn 0.
double effective_reliability(const std::vector<ScoredSample>& samples,
                             double threshold, double cost);

// Global abstention-threshold sweep over candidate_thresholds; ties broken
// toward the larger threshold (more abstention).
SweepResult sweep_threshold(const std::vector<ScoredSample>& samples, double cost);

// Full report: curve over candidate thresholds, AUC, Cov@risk table and
// phi at the given threshold (swept here when threshold is NaN).
EvaluationReport evaluate(const std::vector<ScoredSample>& samples, double cost,
                          const std::vector<double>& risk_budgets, double threshold,
                          RiskMode mode = RiskMode::kSoft);

}  // namespace abstain::metrics
