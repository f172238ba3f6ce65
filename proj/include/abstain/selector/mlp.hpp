#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace abstain::selector {

struct FeatureDims {
  int d_h = 0;
  int d_q = 0;
  int d_a = 0;
  int n_classes = 0;
};

// Row-vector convention throughout: activations are B x dim and layers apply
// x * W + b with W of shape (in x out) and b stored as a 1 x out matrix.
//
// Question and answer embeddings pass through one hidden layer each, the
// hidden state through two; the concatenated branches feed a three-layer
// classification head. Rectifier on every hidden layer, none on the logits.
struct MlpParams {
  FeatureDims dims;
  int d = 0;  // hidden width

  Eigen::MatrixXd w_q, b_q;
  Eigen::MatrixXd w_a, b_a;
  Eigen::MatrixXd w_h1, b_h1;
  Eigen::MatrixXd w_h2, b_h2;
  Eigen::MatrixXd w1, b1;  // 3d -> d
  Eigen::MatrixXd w2, b2;  // d -> d
  Eigen::MatrixXd w3, b3;  // d -> C

  static MlpParams zeros(const FeatureDims& dims, int d);
  static MlpParams seeded(const FeatureDims& dims, int d, std::uint64_t seed);

  // Tensors in a fixed order shared by the optimizer, the checkpoint writer
  // and the gradient checker.
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensors();
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensors() const;
};

struct MlpCache {
  Eigen::MatrixXd zq, za, zh1, zh2;  // post-rectifier branch activations
  Eigen::MatrixXd u;                 // concatenated [h-branch | q | a]
  Eigen::MatrixXd z1, z2;
};

// H/Q/A are B x D_* design matrices; returns B x C logits.
Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& h,
                            const Eigen::MatrixXd& q, const Eigen::MatrixXd& a,
                            MlpCache* cache = nullptr);

// Accumulates parameter gradients for dL/dlogits into `grads` (shapes must
// match `params`; typically MlpParams::zeros).
void mlp_backward(const MlpParams& params, const MlpCache& cache,
                  const Eigen::MatrixXd& h, const Eigen::MatrixXd& q,
                  const Eigen::MatrixXd& a, const Eigen::MatrixXd& grad_logits,
                  MlpParams& grads);

}  // namespace abstain::selector
