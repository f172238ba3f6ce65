#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "abstain/common/error.hpp"
#include "abstain/core/types.hpp"

namespace abstain::selector {

// Floor applied inside logarithms so a vanishing true-class probability
// yields a large finite loss instead of inf.
inline constexpr double kLogFloor = 1e-12;

// Numerically stable softmax of any vector expression.
template <typename Derived>
Eigen::VectorXd softmax(const Eigen::MatrixBase<Derived>& logits) {
  const Eigen::VectorXd z = logits;
  if (!z.allFinite()) throw ValidationError("non-finite logits in softmax");
  const Eigen::ArrayXd shifted = z.array() - z.maxCoeff();
  const Eigen::ArrayXd e = shifted.exp();
  return (e / e.sum()).matrix();
}

inline void check_class_index(int class_index, Eigen::Index n_classes) {
  if (class_index < 0 || class_index >= n_classes)
    throw ValidationError("class index out of range: " + std::to_string(class_index));
}

// -log p(true class); the floored branch is reported through `floored`.
inline double cross_entropy_loss(const Eigen::VectorXd& probabilities, int class_index,
                                 bool* floored = nullptr) {
  check_class_index(class_index, probabilities.size());
  const double p = probabilities[class_index];
  if (floored) *floored = p < kLogFloor;
  return -std::log(std::max(p, kLogFloor));
}

// alpha_y * (1 - p_y)^gamma * (-log p_y). gamma = 0 with unit alpha reduces
// to cross-entropy.
inline double focal_loss(const Eigen::VectorXd& probabilities, int class_index,
                         const Eigen::VectorXd& alpha, double gamma,
                         bool* floored = nullptr) {
  check_class_index(class_index, probabilities.size());
  if (alpha.size() != probabilities.size())
    throw ValidationError("alpha size does not match class count");
  if (gamma < 0.0) throw ValidationError("gamma must be nonnegative");
  const double p = probabilities[class_index];
  if (floored) *floored = p < kLogFloor;
  const double modulator = gamma == 0.0 ? 1.0 : std::pow(1.0 - p, gamma);
  return alpha[class_index] * modulator * -std::log(std::max(p, kLogFloor));
}

// d(focal)/d(logits) at probabilities = softmax(logits). Matches the floored
// forward exactly: below the floor only the modulator path carries gradient.
inline Eigen::VectorXd focal_loss_grad_logits(const Eigen::VectorXd& probabilities,
                                              int class_index,
                                              const Eigen::VectorXd& alpha,
                                              double gamma) {
  check_class_index(class_index, probabilities.size());
  const double p = probabilities[class_index];
  const double one_minus = 1.0 - p;
  double dl_dp = 0.0;
  if (p >= kLogFloor) {
    const double term1 = (gamma == 0.0 || one_minus <= 0.0)
                             ? 0.0
                             : gamma * std::pow(one_minus, gamma - 1.0) * std::log(p);
    const double term2 = -(gamma == 0.0 ? 1.0 : std::pow(one_minus, gamma)) / p;
    dl_dp = alpha[class_index] * (term1 + term2);
  } else if (gamma > 0.0) {
    dl_dp = alpha[class_index] * gamma * std::pow(one_minus, gamma - 1.0) *
            std::log(kLogFloor);
  }
  // Chain through softmax: dp_y/dz_k = p_y (delta_yk - p_k).
  Eigen::VectorXd grad = -dl_dp * p * probabilities;
  grad[class_index] += dl_dp * p;
  return grad;
}

// d(cross-entropy)/d(logits) = p - onehot(y); kept separate as an algebraic
// cross-check for the focal gradient at gamma = 0.
inline Eigen::VectorXd cross_entropy_grad_logits(const Eigen::VectorXd& probabilities,
                                                 int class_index) {
  check_class_index(class_index, probabilities.size());
  Eigen::VectorXd grad = probabilities;
  grad[class_index] -= 1.0;
  return grad;
}

// Expected accuracy under the predicted class distribution.
inline double expected_accuracy(const Eigen::VectorXd& probabilities,
                                const core::ClassMap& class_map) {
  if (probabilities.size() != class_map.size())
    throw ValidationError("probability vector does not match class map");
  double s = 0.0;
  for (int c = 0; c < class_map.size(); ++c) s += class_map.value(c) * probabilities[c];
  return s;
}

}  // namespace abstain::selector
