#include "abstain/selector/train.hpp"

#include <cmath>
#include <numeric>

#include "abstain/common/error.hpp"
#include "abstain/common/rng.hpp"
#include "abstain/metrics/metrics.hpp"
#include "abstain/selector/loss.hpp"

namespace abstain::selector {
namespace {

struct Adam {
  double learning_rate;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step = 0;
  std::vector<Eigen::MatrixXd> m, v;

  explicit Adam(double lr) : learning_rate(lr) {}

  void init(const std::vector<std::pair<std::string, Eigen::MatrixXd*>>& tensors) {
    for (auto& [name, t] : tensors) {
      m.push_back(Eigen::MatrixXd::Zero(t->rows(), t->cols()));
      v.push_back(Eigen::MatrixXd::Zero(t->rows(), t->cols()));
    }
  }

  void update(std::vector<std::pair<std::string, Eigen::MatrixXd*>> params,
              std::vector<std::pair<std::string, Eigen::MatrixXd*>> grads) {
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Eigen::MatrixXd& g = *grads[i].second;
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = (beta2 * v[i].array() + (1.0 - beta2) * g.array().square()).matrix();
      const Eigen::ArrayXXd m_hat = m[i].array() / bc1;
      const Eigen::ArrayXXd v_hat = v[i].array() / bc2;
      params[i].second->array() -= learning_rate * m_hat / (v_hat.sqrt() + eps);
    }
  }
};

// One architecture-dispatching view over forward/backward so the training
// loop is written once.
struct Net {
  SelectorModel& model;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& h, const Eigen::MatrixXd& q,
                          const Eigen::MatrixXd& a, MlpCache& mlp_cache,
                          TransformerCache& tr_cache) {
    if (auto* mlp = std::get_if<MlpParams>(&model.params))
      return mlp_forward(*mlp, h, q, a, &mlp_cache);
    return transformer_forward(std::get<TransformerParams>(model.params), h, q, a,
                               &tr_cache);
  }

  void backward(const Eigen::MatrixXd& h, const Eigen::MatrixXd& q,
                const Eigen::MatrixXd& a, const Eigen::MatrixXd& grad_logits,
                const MlpCache& mlp_cache, const TransformerCache& tr_cache,
                SelectorModel& grads) {
    if (auto* mlp = std::get_if<MlpParams>(&model.params)) {
      mlp_backward(*mlp, mlp_cache, h, q, a, grad_logits,
                   std::get<MlpParams>(grads.params));
      return;
    }
    transformer_backward(std::get<TransformerParams>(model.params), tr_cache, h, q, a,
                         grad_logits, std::get<TransformerParams>(grads.params));
  }

  std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensors() {
    if (auto* mlp = std::get_if<MlpParams>(&model.params)) return mlp->tensors();
    return std::get<TransformerParams>(model.params).tensors();
  }
};

double validation_metric(const SelectorModel& model, const DesignMatrices& val,
                         const TrainConfig& config, const Eigen::VectorXd& alpha,
                         long long* floor_events) {
  const Eigen::MatrixXd logits = model.logits(val.h, val.q, val.a);
  if (config.selection_metric == SelectionMetric::kValLoss) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      bool floored = false;
      total += focal_loss(softmax(logits.row(i).transpose()),
                          val.labels[static_cast<std::size_t>(i)], alpha,
                          config.gamma, &floored);
      if (floored) ++*floor_events;
    }
    return total / static_cast<double>(logits.rows());
  }
  std::vector<metrics::ScoredSample> samples;
  samples.reserve(val.ids.size());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    samples.push_back({val.ids[idx],
                       expected_accuracy(softmax(logits.row(i).transpose()),
                                         model.class_map),
                       val.accuracies[idx]});
  }
  return metrics::sweep_threshold(samples, config.phi_cost).phi;
}

bool is_improvement(SelectionMetric metric, double candidate, double best) {
  return metric == SelectionMetric::kValLoss ? candidate < best : candidate > best;
}

}  // namespace

std::pair<SelectorModel, TrainReport> train_selector(
    const std::vector<core::FeatureRecord>& train_records,
    const std::vector<core::FeatureRecord>& val_records, const TrainConfig& config,
    const core::ClassMap& class_map) {
  if (train_records.empty() || val_records.empty())
    throw ValidationError("training needs nonempty train and validation sets");
  config.validate(class_map.size());

  const DesignMatrices train = stack_records(train_records);
  const DesignMatrices val = stack_records(val_records);

  const FeatureDims dims{static_cast<int>(train.h.cols()),
                         static_cast<int>(train.q.cols()),
                         static_cast<int>(train.a.cols()), class_map.size()};

  SelectorModel model;
  model.config = config;
  model.class_map = class_map;
  if (config.architecture == Architecture::kMlp) {
    model.params = MlpParams::seeded(dims, config.d, config.seed);
  } else {
    model.params = TransformerParams::seeded(dims, config.d, config.n_heads,
                                             config.seed);
  }
  SelectorModel grads = model;
  if (auto* mlp = std::get_if<MlpParams>(&grads.params)) {
    *mlp = MlpParams::zeros(dims, config.d);
  } else {
    std::get<TransformerParams>(grads.params) =
        TransformerParams::zeros(dims, config.d, config.n_heads);
  }

  std::vector<double> alpha_vec =
      config.alpha.empty() ? inverse_frequency_alpha(train.labels, class_map.size())
                           : config.alpha;
  const Eigen::VectorXd alpha =
      Eigen::Map<const Eigen::VectorXd>(alpha_vec.data(),
                                        static_cast<Eigen::Index>(alpha_vec.size()));

  Net net{model};
  Adam adam(config.learning_rate);
  adam.init(net.tensors());

  Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_records.size());
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  SelectorModel best_model = model;
  double best_metric = 0.0;
  bool have_best = false;

  MlpCache mlp_cache;
  TransformerCache tr_cache;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(order.size() - start,
                                         static_cast<std::size_t>(config.batch_size));
      const auto bn = static_cast<Eigen::Index>(count);
      Eigen::MatrixXd h(bn, train.h.cols());
      Eigen::MatrixXd q(bn, train.q.cols());
      Eigen::MatrixXd a(bn, train.a.cols());
      std::vector<int> labels(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src = order[start + i];
        const auto row = static_cast<Eigen::Index>(i);
        h.row(row) = train.h.row(static_cast<Eigen::Index>(src));
        q.row(row) = train.q.row(static_cast<Eigen::Index>(src));
        a.row(row) = train.a.row(static_cast<Eigen::Index>(src));
        labels[i] = train.labels[src];
      }

      const Eigen::MatrixXd logits = net.forward(h, q, a, mlp_cache, tr_cache);
      Eigen::MatrixXd grad_logits(bn, class_map.size());
      double batch_loss = 0.0;
      for (Eigen::Index i = 0; i < bn; ++i) {
        const Eigen::VectorXd probs = softmax(logits.row(i).transpose());
        bool floored = false;
        batch_loss += focal_loss(probs, labels[static_cast<std::size_t>(i)], alpha,
                                 config.gamma, &floored);
        if (floored) ++report.floor_events;
        grad_logits.row(i) =
            focal_loss_grad_logits(probs, labels[static_cast<std::size_t>(i)], alpha,
                                   config.gamma)
                .transpose() /
            static_cast<double>(bn);
      }
      if (!std::isfinite(batch_loss))
        throw ValidationError("training diverged (non-finite loss) at epoch " +
                              std::to_string(epoch + 1));
      epoch_loss_sum += batch_loss;

      auto grad_tensors = std::get_if<MlpParams>(&grads.params)
                              ? std::get<MlpParams>(grads.params).tensors()
                              : std::get<TransformerParams>(grads.params).tensors();
      for (auto& [name, tensor] : grad_tensors) tensor->setZero();
      net.backward(h, q, a, grad_logits, mlp_cache, tr_cache, grads);
      adam.update(net.tensors(), grad_tensors);
    }

    report.train_loss.push_back(epoch_loss_sum /
                                static_cast<double>(train_records.size()));
    const double metric =
        validation_metric(model, val, config, alpha, &report.floor_events);
    if (!std::isfinite(metric))
      throw ValidationError("training diverged (non-finite validation metric) at epoch " +
                            std::to_string(epoch + 1));
    report.val_metric.push_back(metric);

    if (!have_best || is_improvement(config.selection_metric, metric, best_metric)) {
      have_best = true;
      best_metric = metric;
      best_model = model;
      report.selected_epoch = epoch;
    }
  }

  report.param_checksum = best_model.checksum();
  return {best_model, report};
}

}  // namespace abstain::selector
