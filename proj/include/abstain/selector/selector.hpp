#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abstain/core/types.hpp"
#include "abstain/selector/mlp.hpp"
#include "abstain/selector/transformer.hpp"

namespace abstain::selector {

enum class Architecture { kMlp, kTransformer };
enum class SelectionMetric { kPhiC, kValLoss };

std::string to_string(Architecture a);
Architecture architecture_from_string(const std::string& s);
std::string to_string(SelectionMetric m);
SelectionMetric selection_metric_from_string(const std::string& s);

struct TrainConfig {
  Architecture architecture = Architecture::kMlp;
  int d = 256;
  int n_heads = 4;
  std::vector<double> alpha;  // empty: inverse class frequency, max-normalized
  double gamma = 2.0;
  double learning_rate = 1e-3;
  int batch_size = 128;
  int epochs = 20;
  std::uint64_t seed = 0;
  SelectionMetric selection_metric = SelectionMetric::kPhiC;
  double phi_cost = 100.0;  // cost used by the phi_c selection metric

  void validate(int n_classes) const;
};

struct TrainReport {
  std::vector<double> train_loss;  // mean focal loss per epoch
  std::vector<double> val_metric;  // per epoch, meaning set by selection_metric
  int selected_epoch = 0;          // 0-based
  std::string param_checksum;
  long long floor_events = 0;  // times the log floor clipped a probability
};

// A trained confidence head: architecture parameters plus the class map that
// converts class probabilities into an expected-accuracy score.
struct SelectorModel {
  TrainConfig config;
  core::ClassMap class_map;
  std::variant<MlpParams, TransformerParams> params;

  Architecture architecture() const { return config.architecture; }
  const FeatureDims& feature_dims() const;

  // Batched forward over design matrices (rows are samples).
  Eigen::MatrixXd logits(const Eigen::MatrixXd& h, const Eigen::MatrixXd& q,
                         const Eigen::MatrixXd& a) const;

  Eigen::VectorXd logits(const core::FeatureRecord& record) const;
  Eigen::VectorXd probabilities(const core::FeatureRecord& record) const;

  // Expected accuracy s = sum_c a_c p(c); bounded by the class-map range.
  double predict_confidence(const core::FeatureRecord& record) const;
  std::vector<double> predict_confidence(
      const std::vector<core::FeatureRecord>& records) const;

  std::string checksum() const;
};

// Stacks record features into B x D design matrices (float storage widened
// to double for the numeric core).
struct DesignMatrices {
  Eigen::MatrixXd h, q, a;
  std::vector<int> labels;
  std::vector<double> accuracies;
  std::vector<std::string> ids;
};
DesignMatrices stack_records(const std::vector<core::FeatureRecord>& records);

// Inverse class-frequency weights scaled so the largest is 1.
std::vector<double> inverse_frequency_alpha(const std::vector<int>& labels,
                                            int n_classes);

}  // namespace abstain::selector
