#include "abstain/selector/gradient_check.hpp"

#include <cmath>

#include "abstain/common/error.hpp"
#include "abstain/selector/loss.hpp"

namespace abstain::selector {

GradientCheckResult gradient_check(const SelectorModel& model,
                                   const core::FeatureRecord& record, double epsilon,
                                   int max_entries_per_tensor) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3))
    throw ValidationError("gradient check epsilon must lie in [1e-7, 1e-3]");

  const Eigen::MatrixXd h = record.h.cast<double>().transpose();
  const Eigen::MatrixXd q = record.q.cast<double>().transpose();
  const Eigen::MatrixXd a = record.a.cast<double>().transpose();
  const int label = record.class_index;

  SelectorModel work = model;
  const std::vector<double>& cfg_alpha = model.config.alpha;
  Eigen::VectorXd alpha = Eigen::VectorXd::Ones(model.class_map.size());
  if (!cfg_alpha.empty()) {
    alpha = Eigen::Map<const Eigen::VectorXd>(
        cfg_alpha.data(), static_cast<Eigen::Index>(cfg_alpha.size()));
  }
  const double gamma = model.config.gamma;

  auto loss_at = [&]() {
    const Eigen::MatrixXd logits = work.logits(h, q, a);
    return focal_loss(softmax(logits.row(0).transpose()), label, alpha, gamma);
  };

  // Analytic gradients via one forward/backward pass.
  SelectorModel analytic = work;
  MlpCache mlp_cache;
  TransformerCache tr_cache;
  Eigen::MatrixXd logits;
  if (auto* mlp = std::get_if<MlpParams>(&work.params)) {
    std::get<MlpParams>(analytic.params) = MlpParams::zeros(mlp->dims, mlp->d);
    logits = mlp_forward(*mlp, h, q, a, &mlp_cache);
  } else {
    auto& tr = std::get<TransformerParams>(work.params);
    std::get<TransformerParams>(analytic.params) =
        TransformerParams::zeros(tr.dims, tr.d, tr.n_heads);
    logits = transformer_forward(tr, h, q, a, &tr_cache);
  }
  const Eigen::MatrixXd grad_logits =
      focal_loss_grad_logits(softmax(logits.row(0).transpose()), label, alpha, gamma)
          .transpose();
  if (auto* mlp = std::get_if<MlpParams>(&work.params)) {
    mlp_backward(*mlp, mlp_cache, h, q, a, grad_logits,
                 std::get<MlpParams>(analytic.params));
  } else {
    transformer_backward(std::get<TransformerParams>(work.params), tr_cache, h, q, a,
                         grad_logits, std::get<TransformerParams>(analytic.params));
  }

  auto work_tensors = std::get_if<MlpParams>(&work.params)
                          ? std::get<MlpParams>(work.params).tensors()
                          : std::get<TransformerParams>(work.params).tensors();
  auto analytic_tensors = std::get_if<MlpParams>(&analytic.params)
                              ? std::get<MlpParams>(analytic.params).tensors()
                              : std::get<TransformerParams>(analytic.params).tensors();

  GradientCheckResult result;
  for (std::size_t t = 0; t < work_tensors.size(); ++t) {
    Eigen::MatrixXd& tensor = *work_tensors[t].second;
    const Eigen::MatrixXd& grad = *analytic_tensors[t].second;
    const Eigen::Index size = tensor.size();
    const Eigen::Index budget =
        max_entries_per_tensor > 0
            ? std::min<Eigen::Index>(size, max_entries_per_tensor)
            : size;
    for (Eigen::Index s = 0; s < budget; ++s) {
      const Eigen::Index idx = s * size / budget;  // evenly strided, deterministic
      double* value = tensor.data() + idx;
      const double saved = *value;
      *value = saved + epsilon;
      const double loss_plus = loss_at();
      *value = saved - epsilon;
      const double loss_minus = loss_at();
      *value = saved;

      const double g_fd = (loss_plus - loss_minus) / (2.0 * epsilon);
      const double g_an = *(grad.data() + idx);
      const double rel =
          std::abs(g_an - g_fd) / std::max(1e-8, std::abs(g_an) + std::abs(g_fd));
      ++result.entries_checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_tensor = work_tensors[t].first;
      }
    }
  }
  return result;
}

}  // namespace abstain::selector
