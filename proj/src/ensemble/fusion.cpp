#include "abstain/ensemble/fusion.hpp"

#include <json.hpp>

#include "abstain/common/error.hpp"
#include "abstain/common/fs.hpp"
#include "abstain/common/strings.hpp"

namespace abstain::ensemble {

using nlohmann::json;

FusionPlan FusionPlan::default_plan() {
  return FusionPlan{{"mlp", "transformer", "vlm_p", "vlm_l"}, {0.5, 0.5, 0.5}};
}

FusionPlan FusionPlan::load_json(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError("fusion plan parse error: " + std::string(e.what()));
  }
  FusionPlan plan;
  plan.sources = j.at("sources").get<std::vector<std::string>>();
  if (j.contains("stage_weights")) {
    plan.stage_weights = j.at("stage_weights").get<std::vector<double>>();
  } else if (plan.sources.size() >= 1) {
    plan.stage_weights.assign(plan.sources.size() - 1, 0.5);
  }
  plan.validate();
  return plan;
}

void FusionPlan::save_json(const std::filesystem::path& path) const {
  validate();
  atomic_write_file(path,
                    json{{"sources", sources}, {"stage_weights", stage_weights}}.dump(2) + "\n");
}

void FusionPlan::validate() const {
  if (sources.empty()) throw ValidationError("fusion plan needs at least one source");
  if (stage_weights.size() != sources.size() - 1)
    throw ValidationError("fusion plan needs one weight per stage (" +
                          std::to_string(sources.size() - 1) + "), got " +
                          std::to_string(stage_weights.size()));
  for (double w : stage_weights) {
    if (!(w >= 0.0 && w <= 1.0))
      throw ValidationError("stage weight out of [0,1]: " + fmt_double(w));
  }
}

double fuse_pair(double s1, double s2, double w) {
  if (!(s1 >= 0.0 && s1 <= 1.0) || !(s2 >= 0.0 && s2 <= 1.0))
    throw ValidationError("scores must lie in [0,1]");
  if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("mixing weight must lie in [0,1]");
  return (1.0 - w) * s1 + w * s2;
}

std::vector<double> fuse_cascade(const ScoreSet& scores, const FusionPlan& plan) {
  plan.validate();
  std::vector<double> fused = scores.column(plan.sources[0]);
  for (double s : fused) {
    if (!(s >= 0.0 && s <= 1.0))
      throw ValidationError("score out of [0,1] in column " + plan.sources[0]);
  }
  for (std::size_t stage = 1; stage < plan.sources.size(); ++stage) {
    const std::vector<double>& next = scores.column(plan.sources[stage]);
    const double w = plan.stage_weights[stage - 1];
    for (std::size_t i = 0; i < fused.size(); ++i) {
      fused[i] = fuse_pair(fused[i], next[i], w);
    }
  }
  return fused;
}

std::vector<double> effective_weights(const FusionPlan& plan) {
  plan.validate();
  std::vector<double> weights{1.0};
  for (std::size_t stage = 1; stage < plan.sources.size(); ++stage) {
    const double w = plan.stage_weights[stage - 1];
    for (double& prev : weights) prev *= 1.0 - w;
    weights.push_back(w);
  }
  return weights;
}

}  // namespace abstain::ensemble
