#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "abstain/common/error.hpp"
#include "abstain/common/rng.hpp"
#include "abstain/metrics/metrics.hpp"
#include "abstain/metrics/vqa_accuracy.hpp"
#include "oracles.hpp"

using namespace abstain;
using metrics::RiskMode;
using metrics::ScoredSample;

namespace {

// The worked four-sample instance used across the curve/auc/cov cases.
std::vector<ScoredSample> four_samples() {
  return {{"a", 0.9, 1.0}, {"b", 0.8, 1.0}, {"c", 0.7, 0.0}, {"d", 0.6, 1.0}};
}

}  // namespace

TEST_CASE("vqa soft accuracy by leave-one-out enumeration") {
  std::vector<std::string> humans(10, "no");
  CHECK(metrics::vqa_soft_accuracy("yes", humans) == 0.0);

  humans.assign(10, "yes");
  CHECK(metrics::vqa_soft_accuracy("yes", humans) == 1.0);

  // exactly 3 matches: 3 leave-one-out subsets see 2/3, 7 see 3/3
  humans = {"yes", "yes", "yes", "no", "no", "no", "no", "no", "no", "no"};
  CHECK(metrics::vqa_soft_accuracy("yes", humans) == 0.9);

  humans[3] = "yes";  // 4 matches saturate min(m/3, 1)
  CHECK(metrics::vqa_soft_accuracy("yes", humans) == 1.0);

  humans = {"yes", "no", "no", "no", "no", "no", "no", "no", "no", "no"};
  CHECK(metrics::vqa_soft_accuracy("yes", humans) == 0.3);

  CHECK_THROWS_AS(metrics::vqa_soft_accuracy("yes", {"yes", "no"}), ValidationError);
}

TEST_CASE("risk-coverage curve on the worked instance") {
  const auto samples = four_samples();
  const auto curve =
      metrics::risk_coverage_curve(samples, {0.95, 0.85, 0.75, 0.65, 0.55});
  REQUIRE(curve.size() == 5);
  CHECK(curve[0].coverage == 0.0);
  CHECK(curve[0].risk == 0.0);
  CHECK(curve[1].coverage == 0.25);
  CHECK(curve[1].risk == 0.0);
  CHECK(curve[2].coverage == 0.5);
  CHECK(curve[2].risk == 0.0);
  CHECK(curve[3].coverage == 0.75);
  CHECK(curve[3].risk == doctest::Approx(1.0 / 3.0));
  CHECK(curve[4].coverage == 1.0);
  CHECK(curve[4].risk == doctest::Approx(0.25));
}

TEST_CASE("curve: all-correct samples carry zero risk at every coverage") {
  std::vector<ScoredSample> samples;
  Rng rng(3);
  for (int i = 0; i < 50; ++i)
    samples.push_back({"s" + std::to_string(i), rng.uniform01(), 1.0});
  for (const auto& point :
       metrics::risk_coverage_curve(samples, metrics::candidate_thresholds(samples)))
    CHECK(point.risk == 0.0);
}

TEST_CASE("coverage is nonincreasing in threshold, 1 at min sentinel, 0 above max") {
  Rng rng(11);
  const auto samples = oracles::random_samples(rng, 200, true);
  const auto thresholds = metrics::candidate_thresholds(samples);
  const auto curve = metrics::risk_coverage_curve(samples, thresholds);
  CHECK(curve.front().coverage == 1.0);
  CHECK(curve.back().coverage == 0.0);
  for (std::size_t i = 1; i < curve.size(); ++i)
    CHECK(curve[i].coverage <= curve[i - 1].coverage);
}

TEST_CASE("auc_100 trivial endpoints") {
  std::vector<ScoredSample> perfect, hopeless;
  Rng rng(5);
  for (int i = 0; i < 64; ++i) {
    perfect.push_back({"p" + std::to_string(i), rng.uniform01(), 1.0});
    hopeless.push_back({"h" + std::to_string(i), rng.uniform01(), 0.0});
  }
  CHECK(metrics::auc_100(perfect) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(metrics::auc_100(hopeless) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("auc_100 matches the enumeration oracle on the worked instance") {
  const auto samples = four_samples();
  CHECK(metrics::auc_100(samples) ==
        doctest::Approx(oracles::auc_100(samples)).epsilon(1e-12));
}

TEST_CASE("coverage_at_risk on the worked instance") {
  const auto samples = four_samples();
  CHECK(metrics::coverage_at_risk(samples, 0.0) == 0.5);
  CHECK(metrics::coverage_at_risk(samples, 1.0) == 1.0);

  std::vector<ScoredSample> hopeless;
  for (int i = 0; i < 10; ++i)
    hopeless.push_back({"h" + std::to_string(i), 0.1 * i, 0.0});
  CHECK(metrics::coverage_at_risk(hopeless, 0.0) == 0.0);
}

TEST_CASE("effective reliability per-item arithmetic") {
  const std::vector<ScoredSample> samples{
      {"a", 0.9, 1.0}, {"b", 0.8, 0.9}, {"c", 0.3, 0.0}};
  CHECK(metrics::effective_reliability(samples, 0.5, 100.0) ==
        doctest::Approx((100.0 + 90.0 + 0.0) / 3.0));
  CHECK(metrics::effective_reliability(samples, 0.95, 100.0) == 0.0);

  std::vector<ScoredSample> all_in{{"a", 0.9, 1.0}, {"b", 0.8, 1.0}};
  CHECK(metrics::effective_reliability(all_in, 0.0, 100.0) == 100.0);
}

TEST_CASE("sweep_threshold picks the answer-top regime") {
  const std::vector<ScoredSample> samples{{"a", 0.9, 1.0}, {"b", 0.8, 0.0}};
  const auto pick = metrics::sweep_threshold(samples, 100.0);
  CHECK(pick.phi == 50.0);
  CHECK(pick.threshold > 0.8);
  CHECK(pick.threshold <= 0.9);
}

TEST_CASE("sweep_threshold degenerate ends") {
  std::vector<ScoredSample> hopeless, perfect;
  Rng rng(9);
  for (int i = 0; i < 32; ++i) {
    hopeless.push_back({"h" + std::to_string(i), rng.uniform01(), 0.0});
    perfect.push_back({"p" + std::to_string(i), rng.uniform01(), 1.0});
  }
  CHECK(metrics::sweep_threshold(hopeless, 100.0).phi == 0.0);  // full abstention
  CHECK(metrics::sweep_threshold(perfect, 100.0).phi == 100.0);
}

TEST_CASE("random instances: cov@risk and sweep match brute force exactly") {
  Rng rng(20240817);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.index(300);
    const auto samples = oracles::random_samples(rng, n, trial % 2 == 0);
    for (double budget : {0.0, 0.05, 0.2, 0.5}) {
      CHECK(metrics::coverage_at_risk(samples, budget) ==
            oracles::coverage_at_risk(samples, budget));
    }
    const auto got = metrics::sweep_threshold(samples, 100.0);
    const auto want = oracles::sweep(samples, 100.0);
    CHECK(got.phi == want.phi);
    CHECK(got.threshold == want.threshold);
    CHECK(std::abs(metrics::auc_100(samples) - oracles::auc_100(samples)) < 1e-9);
  }
}

TEST_CASE("binarized risk mode counts only zero-accuracy answers as errors") {
  // one answer at accuracy 0.3: soft risk 0.35, binarized risk 0
  const std::vector<ScoredSample> samples{{"a", 0.9, 0.3}, {"b", 0.8, 1.0}};
  const auto soft = metrics::risk_coverage_curve(samples, {0.0});
  const auto bin = metrics::risk_coverage_curve(samples, {0.0}, RiskMode::kBinarized);
  CHECK(soft[0].risk == doctest::Approx(0.35));
  CHECK(bin[0].risk == 0.0);

  Rng rng(77);
  const auto rand_samples = oracles::random_samples(rng, 257);
  CHECK(metrics::coverage_at_risk(rand_samples, 0.1, RiskMode::kBinarized) ==
        oracles::coverage_at_risk(rand_samples, 0.1, RiskMode::kBinarized));
  CHECK(std::abs(metrics::auc_100(rand_samples, RiskMode::kBinarized) -
                 oracles::auc_100(rand_samples, RiskMode::kBinarized)) < 1e-9);
}

TEST_CASE("phi and auc are invariant under monotone score transforms") {
  Rng rng(4242);
  const auto samples = oracles::random_samples(rng, 128);
  const double threshold = 0.4;
  const double phi_before = metrics::effective_reliability(samples, threshold, 100.0);
  const double auc_before = metrics::auc_100(samples);

  auto squash = [](double s) { return s * s * s; };  // strictly increasing on [0,1]
  auto transformed = samples;
  for (auto& s : transformed) s.confidence = squash(s.confidence);

  CHECK(metrics::effective_reliability(transformed, squash(threshold), 100.0) ==
        phi_before);
  CHECK(metrics::auc_100(transformed) == auc_before);
}

TEST_CASE("evaluate assembles a self-consistent report") {
  const auto samples = four_samples();
  const auto report = metrics::evaluate(samples, 100.0, {0.0, 0.05},
                                        std::numeric_limits<double>::quiet_NaN());
  CHECK(report.n_samples == 4);
  CHECK(report.phi_c ==
        metrics::effective_reliability(samples, report.chosen_threshold, 100.0));
  REQUIRE(report.cov_at.size() == 2);
  CHECK(report.cov_at[0].second == 0.5);
  CHECK(report.auc100 == metrics::auc_100(samples));
}

TEST_CASE("sample validation rejects bad inputs") {
  CHECK_THROWS_AS(metrics::validate_samples({}), ValidationError);
  CHECK_THROWS_AS(metrics::validate_samples({{"a", 1.2, 0.5}}), ValidationError);
  CHECK_THROWS_AS(metrics::validate_samples({{"a", 0.5, -0.1}}), ValidationError);
  CHECK_THROWS_AS(metrics::validate_samples({{"a", 0.5, 0.5}, {"a", 0.4, 0.4}}),
                  ValidationError);
}
