#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "abstain/common/error.hpp"
#include "abstain/common/rng.hpp"
#include "abstain/ensemble/fusion.hpp"
#include "abstain/metrics/metrics.hpp"
#include "abstain/scores.hpp"

using namespace abstain;
using ensemble::FusionPlan;

namespace {

ScoreSet four_source_set(const std::vector<std::vector<double>>& columns) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < columns[0].size(); ++i)
    ids.push_back("r" + std::to_string(i));
  ScoreSet set(ids);
  const char* names[] = {"mlp", "transformer", "vlm_p", "vlm_l"};
  for (std::size_t c = 0; c < columns.size(); ++c) set.add_column(names[c], columns[c]);
  return set;
}

FusionPlan random_plan(Rng& rng, std::size_t n_sources) {
  FusionPlan plan;
  for (std::size_t s = 0; s < n_sources; ++s)
    plan.sources.push_back("c" + std::to_string(s));
  for (std::size_t s = 1; s < n_sources; ++s)
    plan.stage_weights.push_back(rng.uniform01());
  return plan;
}

}  // namespace

TEST_CASE("fuse_pair arithmetic and range checks") {
  CHECK(ensemble::fuse_pair(0.4, 0.6, 0.5) == 0.5);
  CHECK(ensemble::fuse_pair(0.8, 0.6, 0.5) == doctest::Approx(0.7).epsilon(1e-15));
  for (double w : {0.0, 0.25, 0.5, 1.0}) {
    CHECK(ensemble::fuse_pair(0.37, 0.37, w) == doctest::Approx(0.37).epsilon(1e-15));
  }
  CHECK_THROWS_AS(ensemble::fuse_pair(1.2, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(ensemble::fuse_pair(0.5, 0.5, 1.5), ValidationError);
}

TEST_CASE("default cascade reproduces the progressive pairwise average") {
  const auto scores = four_source_set({{0.8}, {0.6}, {0.4}, {0.2}});
  const auto fused = ensemble::fuse_cascade(scores, FusionPlan::default_plan());
  REQUIRE(fused.size() == 1);
  // (0.8+0.6)/2 -> 0.7; (0.7+0.4)/2 -> 0.55; (0.55+0.2)/2 -> 0.375
  CHECK(fused[0] == doctest::Approx(0.375).epsilon(1e-15));

  const auto equal = four_source_set({{0.9}, {0.9}, {0.9}, {0.9}});
  CHECK(ensemble::fuse_cascade(equal, FusionPlan::default_plan())[0] ==
        doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("single-source plan is the identity") {
  std::vector<std::string> ids{"a", "b"};
  ScoreSet set(ids);
  set.add_column("only", {0.25, 0.75});
  const FusionPlan plan{{"only"}, {}};
  CHECK(ensemble::fuse_cascade(set, plan) == set.column("only"));
  CHECK(ensemble::effective_weights(plan) == std::vector<double>{1.0});
}

TEST_CASE("effective weights of the default plan") {
  const auto weights = ensemble::effective_weights(FusionPlan::default_plan());
  REQUIRE(weights.size() == 4);
  CHECK(weights[0] == 0.125);
  CHECK(weights[1] == 0.125);
  CHECK(weights[2] == 0.25);
  CHECK(weights[3] == 0.5);

  const FusionPlan two{{"mlp", "transformer"}, {0.5}};
  CHECK(ensemble::effective_weights(two) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("property: cascade equals the effective-weight linear form") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_sources = 1 + rng.index(6);
    const std::size_t n_rows = 1 + rng.index(20);
    FusionPlan plan = random_plan(rng, n_sources);

    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n_rows; ++i) ids.push_back("r" + std::to_string(i));
    ScoreSet set(ids);
    std::vector<std::vector<double>> data;
    for (const std::string& source : plan.sources) {
      std::vector<double> column;
      for (std::size_t i = 0; i < n_rows; ++i) column.push_back(rng.uniform01());
      set.add_column(source, column);
      data.push_back(std::move(column));
    }

    const auto weights = ensemble::effective_weights(plan);
    double weight_total = 0.0;
    for (double w : weights) weight_total += w;
    CHECK(std::abs(weight_total - 1.0) < 1e-12);

    const auto fused = ensemble::fuse_cascade(set, plan);
    for (std::size_t i = 0; i < n_rows; ++i) {
      double linear = 0.0;
      for (std::size_t s = 0; s < weights.size(); ++s) linear += weights[s] * data[s][i];
      CHECK(std::abs(fused[i] - linear) < 1e-12);
      CHECK(fused[i] >= 0.0);
      CHECK(fused[i] <= 1.0);
    }
  }
}

TEST_CASE("monotonicity: raising one source never lowers the fused score") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    FusionPlan plan = random_plan(rng, 4);
    std::vector<std::string> ids{"x"};
    ScoreSet base(ids);
    std::vector<double> values;
    for (const std::string& source : plan.sources) {
      values.push_back(rng.uniform(0.0, 0.9));
      base.add_column(source, {values.back()});
    }
    const double fused_before = ensemble::fuse_cascade(base, plan)[0];

    const std::size_t bump = rng.index(plan.sources.size());
    ScoreSet bumped(ids);
    for (std::size_t s = 0; s < plan.sources.size(); ++s) {
      bumped.add_column(plan.sources[s], {s == bump ? values[s] + 0.1 : values[s]});
    }
    CHECK(ensemble::fuse_cascade(bumped, plan)[0] >= fused_before);
  }
}

TEST_CASE("missing source column is a hard error") {
  std::vector<std::string> ids{"a"};
  ScoreSet set(ids);
  set.add_column("mlp", {0.5});
  CHECK_THROWS_AS(ensemble::fuse_cascade(set, FusionPlan::default_plan()),
                  ValidationError);
}

TEST_CASE("plan json round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "abstain_plan_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "plan.json";
  FusionPlan plan{{"mlp", "vlm_l"}, {0.25}};
  plan.save_json(path);
  const FusionPlan loaded = FusionPlan::load_json(path);
  CHECK(loaded.sources == plan.sources);
  CHECK(loaded.stage_weights == plan.stage_weights);
  std::filesystem::remove_all(dir);
}

TEST_CASE("pipeline consistency: metrics on fused column match precomputed fusion") {
  Rng rng(111);
  const std::size_t n = 200;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("r" + std::to_string(i));
  ScoreSet set(ids);
  std::vector<std::vector<double>> data(4);
  const char* names[] = {"mlp", "transformer", "vlm_p", "vlm_l"};
  for (int c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < n; ++i) data[static_cast<std::size_t>(c)].push_back(rng.uniform01());
    set.add_column(names[c], data[static_cast<std::size_t>(c)]);
  }
  const auto fused = ensemble::fuse_cascade(set, FusionPlan::default_plan());

  static const double kAcc[] = {0.0, 0.3, 0.6, 0.9, 1.0};
  std::vector<metrics::ScoredSample> direct, precomputed;
  for (std::size_t i = 0; i < n; ++i) {
    const double acc = kAcc[rng.index(5)];
    direct.push_back({ids[i], fused[i], acc});
    precomputed.push_back({ids[i], fused[i], acc});
  }
  CHECK(metrics::auc_100(direct) == metrics::auc_100(precomputed));
  CHECK(metrics::sweep_threshold(direct, 100.0).phi ==
        metrics::sweep_threshold(precomputed, 100.0).phi);
}
