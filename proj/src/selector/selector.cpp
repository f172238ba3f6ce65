#include "abstain/selector/selector.hpp"

#include "abstain/common/error.hpp"
#include "abstain/common/hash.hpp"
#include "abstain/selector/loss.hpp"

namespace abstain::selector {

std::string to_string(Architecture a) {
  return a == Architecture::kMlp ? "mlp" : "transformer";
}

Architecture architecture_from_string(const std::string& s) {
  if (s == "mlp") return Architecture::kMlp;
  if (s == "transformer") return Architecture::kTransformer;
  throw ValidationError("unknown architecture: " + s);
}

std::string to_string(SelectionMetric m) {
  return m == SelectionMetric::kPhiC ? "phi_c" : "val_loss";
}

SelectionMetric selection_metric_from_string(const std::string& s) {
  if (s == "phi_c") return SelectionMetric::kPhiC;
  if (s == "val_loss") return SelectionMetric::kValLoss;
  throw ValidationError("unknown selection metric: " + s);
}

void TrainConfig::validate(int n_classes) const {
  if (d <= 0) throw ValidationError("hidden width must be positive");
  if (architecture == Architecture::kTransformer && (n_heads <= 0 || d % n_heads != 0))
    throw ValidationError("hidden width must be divisible by n_heads");
  if (!alpha.empty()) {
    if (static_cast<int>(alpha.size()) != n_classes)
      throw ValidationError("alpha must have one weight per class");
    for (double a : alpha) {
      if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("alpha weights must lie in [0,1]");
    }
  }
  if (gamma < 0.0) throw ValidationError("gamma must be nonnegative");
  if (learning_rate <= 0.0) throw ValidationError("learning rate must be positive");
  if (batch_size <= 0) throw ValidationError("batch size must be positive");
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (phi_cost < 0.0) throw ValidationError("phi cost must be nonnegative");
}

const FeatureDims& SelectorModel::feature_dims() const {
  if (const auto* mlp = std::get_if<MlpParams>(&params)) return mlp->dims;
  return std::get<TransformerParams>(params).dims;
}

Eigen::MatrixXd SelectorModel::logits(const Eigen::MatrixXd& h,
                                      const Eigen::MatrixXd& q,
                                      const Eigen::MatrixXd& a) const {
  if (const auto* mlp = std::get_if<MlpParams>(&params))
    return mlp_forward(*mlp, h, q, a);
  return transformer_forward(std::get<TransformerParams>(params), h, q, a);
}

Eigen::VectorXd SelectorModel::logits(const core::FeatureRecord& record) const {
  const Eigen::MatrixXd h = record.h.cast<double>().transpose();
  const Eigen::MatrixXd q = record.q.cast<double>().transpose();
  const Eigen::MatrixXd a = record.a.cast<double>().transpose();
  return logits(h, q, a).row(0).transpose();
}

Eigen::VectorXd SelectorModel::probabilities(const core::FeatureRecord& record) const {
  return softmax(logits(record));
}

double SelectorModel::predict_confidence(const core::FeatureRecord& record) const {
  return expected_accuracy(probabilities(record), class_map);
}

std::vector<double> SelectorModel::predict_confidence(
    const std::vector<core::FeatureRecord>& records) const {
  const DesignMatrices design = stack_records(records);
  const Eigen::MatrixXd all_logits = logits(design.h, design.q, design.a);
  std::vector<double> out;
  out.reserve(records.size());
  for (Eigen::Index i = 0; i < all_logits.rows(); ++i) {
    out.push_back(
        expected_accuracy(softmax(all_logits.row(i).transpose()), class_map));
  }
  return out;
}

std::string SelectorModel::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto fold = [&h](const std::vector<std::pair<std::string, const Eigen::MatrixXd*>>& ts) {
    for (const auto& [name, tensor] : ts) {
      h = fnv1a64(name, h);
      for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
        for (Eigen::Index c = 0; c < tensor->cols(); ++c) {
          const double v = (*tensor)(r, c);
          h = fnv1a64(&v, sizeof(v), h);
        }
      }
    }
  };
  if (const auto* mlp = std::get_if<MlpParams>(&params)) {
    fold(mlp->tensors());
  } else {
    fold(std::get<TransformerParams>(params).tensors());
  }
  return to_hex(h);
}

DesignMatrices stack_records(const std::vector<core::FeatureRecord>& records) {
  if (records.empty()) throw ValidationError("no records to stack");
  DesignMatrices m;
  const Eigen::Index n = static_cast<Eigen::Index>(records.size());
  m.h.resize(n, records[0].h.size());
  m.q.resize(n, records[0].q.size());
  m.a.resize(n, records[0].a.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const core::FeatureRecord& rec = records[static_cast<std::size_t>(i)];
    if (rec.h.size() != m.h.cols() || rec.q.size() != m.q.cols() ||
        rec.a.size() != m.a.cols())
      throw ValidationError("dimension mismatch at id=" + rec.id);
    m.h.row(i) = rec.h.cast<double>().transpose();
    m.q.row(i) = rec.q.cast<double>().transpose();
    m.a.row(i) = rec.a.cast<double>().transpose();
    m.labels.push_back(rec.class_index);
    m.accuracies.push_back(rec.accuracy);
    m.ids.push_back(rec.id);
  }
  return m;
}

std::vector<double> inverse_frequency_alpha(const std::vector<int>& labels,
                                            int n_classes) {
  std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw ValidationError("label out of range");
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  std::vector<double> alpha(counts.size());
  double max_inv = 0.0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    alpha[c] = 1.0 / std::max(counts[c], 1.0);
    max_inv = std::max(max_inv, alpha[c]);
  }
  for (double& a : alpha) a /= max_inv;
  return alpha;
}

}  // namespace abstain::selector
