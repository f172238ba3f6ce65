#include "abstain/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "abstain/common/error.hpp"

namespace abstain::metrics {
namespace {

// Risk of the answered set {confidence >= threshold}, accumulated in input
// order so that independent enumerations reproduce it bit for bit.
struct AnsweredStats {
  std::size_t count = 0;
  double risk = 0.0;
};

AnsweredStats answered_stats(const std::vector<ScoredSample>& samples,
                             double threshold, RiskMode mode) {
  AnsweredStats st;
  double acc_sum = 0.0;
  std::size_t wrong = 0;
  for (const ScoredSample& s : samples) {
    if (s.confidence >= threshold) {
      ++st.count;
      acc_sum += s.accuracy;
      if (s.accuracy == 0.0) ++wrong;
    }
  }
  if (st.count > 0) {
    st.risk = mode == RiskMode::kSoft
                  ? 1.0 - acc_sum / static_cast<double>(st.count)
                  : static_cast<double>(wrong) / static_cast<double>(st.count);
  }
  return st;
}

}  // namespace

void validate_samples(const std::vector<ScoredSample>& samples) {
  if (samples.empty()) throw ValidationError("no scored samples");
  std::unordered_set<std::string> ids;
  for (const ScoredSample& s : samples) {
    if (!(s.confidence >= 0.0 && s.confidence <= 1.0))
      throw ValidationError("confidence out of [0,1] at id=" + s.id);
    if (!(s.accuracy >= 0.0 && s.accuracy <= 1.0))
      throw ValidationError("accuracy out of [0,1] at id=" + s.id);
    if (!ids.insert(s.id).second)
      throw ValidationError("duplicate id in samples: " + s.id);
  }
}

std::vector<RiskCoveragePoint> risk_coverage_curve(
    const std::vector<ScoredSample>& samples, const std::vector<double>& thresholds,
    RiskMode mode) {
  if (samples.empty()) throw ValidationError("no scored samples");
  const auto n = static_cast<double>(samples.size());
  std::vector<RiskCoveragePoint> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    const AnsweredStats st = answered_stats(samples, t, mode);
    curve.push_back({t, static_cast<double>(st.count) / n, st.risk});
  }
  return curve;
}

std::vector<double> candidate_thresholds(const std::vector<ScoredSample>& samples) {
  if (samples.empty()) throw ValidationError("no scored samples");
  std::vector<double> values;
  values.reserve(samples.size() + 2);
  for (const ScoredSample& s : samples) values.push_back(s.confidence);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  values.insert(values.begin(), values.front() - 1.0);
  values.push_back(values.back() + 1.0);
  return values;
}

double auc_100(const std::vector<ScoredSample>& samples, RiskMode mode) {
  if (samples.empty()) throw ValidationError("no scored samples");
  const std::size_t n = samples.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (samples[i].confidence != samples[j].confidence)
      return samples[i].confidence > samples[j].confidence;
    return samples[i].id < samples[j].id;
  });

  double acc_sum = 0.0;
  std::size_t wrong = 0;
  double auc = 0.0;
  double prev_cov = 0.0;
  double prev_risk = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const ScoredSample& s = samples[order[k - 1]];
    acc_sum += s.accuracy;
    if (s.accuracy == 0.0) ++wrong;
    const double cov = static_cast<double>(k) / static_cast<double>(n);
    const double risk = mode == RiskMode::kSoft
                            ? 1.0 - acc_sum / static_cast<double>(k)
                            : static_cast<double>(wrong) / static_cast<double>(k);
    if (k == 1) prev_risk = risk;  // constant extension over [0, 1/N)
    auc += (cov - prev_cov) * 0.5 * (risk + prev_risk);
    prev_cov = cov;
    prev_risk = risk;
  }
  return 100.0 - 100.0 * auc;
}

double coverage_at_risk(const std::vector<ScoredSample>& samples, double max_risk,
                        RiskMode mode) {
  if (!(max_risk >= 0.0 && max_risk <= 1.0))
    throw ValidationError("max_risk must be in [0,1]");
  if (samples.empty()) throw ValidationError("no scored samples");
  const auto n = static_cast<double>(samples.size());
  double best = 0.0;
  for (double t : candidate_thresholds(samples)) {
    const AnsweredStats st = answered_stats(samples, t, mode);
    if (st.count == 0) continue;
    if (st.risk <= max_risk)
      best = std::max(best, static_cast<double>(st.count) / n);
  }
  return best;
}

double effective_reliability(const std::vector<ScoredSample>& samples,
                             double threshold, double cost) {
  if (cost < 0.0) throw ValidationError("cost must be nonnegative");
  if (samples.empty()) throw ValidationError("no scored samples");
  double total = 0.0;
  for (const ScoredSample& s : samples) {
    if (s.confidence >= threshold)
      total += s.accuracy > 0.0 ? 100.0 * s.accuracy : -cost;
  }
  return total / static_cast<double>(samples.size());
}

SweepResult sweep_threshold(const std::vector<ScoredSample>& samples, double cost) {
  if (samples.empty()) throw ValidationError("no scored samples");
  SweepResult best{0.0, -std::numeric_limits<double>::infinity()};
  for (double t : candidate_thresholds(samples)) {
    const double phi = effective_reliability(samples, t, cost);
    if (phi >= best.phi) best = {t, phi};  // >= resolves ties toward abstention
  }
  return best;
}

EvaluationReport evaluate(const std::vector<ScoredSample>& samples, double cost,
                          const std::vector<double>& risk_budgets, double threshold,
                          RiskMode mode) {
  validate_samples(samples);
  EvaluationReport report;
  report.cost = cost;
  report.risk_mode = mode;
  report.n_samples = samples.size();
  report.curve = risk_coverage_curve(samples, candidate_thresholds(samples), mode);
  report.auc100 = auc_100(samples, mode);
  for (double budget : risk_budgets) {
    report.cov_at.emplace_back(budget, coverage_at_risk(samples, budget, mode));
  }
  if (std::isnan(threshold)) {
    const SweepResult swept = sweep_threshold(samples, cost);
    report.chosen_threshold = swept.threshold;
    report.phi_c = swept.phi;
  } else {
    report.chosen_threshold = threshold;
    report.phi_c = effective_reliability(samples, threshold, cost);
  }
  return report;
}

}  // namespace abstain::metrics
