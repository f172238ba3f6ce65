#include "abstain/selector/mlp.hpp"

#include <cmath>

#include "abstain/common/error.hpp"
#include "abstain/common/rng.hpp"

namespace abstain::selector {
namespace {

Eigen::MatrixXd normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                              double stddev) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = stddev * rng.normal();
  return m;
}

inline Eigen::MatrixXd relu(const Eigen::MatrixXd& x) {
  return x.cwiseMax(0.0);
}

// Rectifier mask from the post-activation (positive iff the input was).
inline Eigen::ArrayXXd relu_mask(const Eigen::MatrixXd& post) {
  return (post.array() > 0.0).cast<double>();
}

inline Eigen::MatrixXd affine(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                              const Eigen::MatrixXd& b) {
  return (x * w).rowwise() + b.row(0);
}

}  // namespace

MlpParams MlpParams::zeros(const FeatureDims& dims, int d) {
  MlpParams p;
  p.dims = dims;
  p.d = d;
  p.w_q = Eigen::MatrixXd::Zero(dims.d_q, d);
  p.b_q = Eigen::MatrixXd::Zero(1, d);
  p.w_a = Eigen::MatrixXd::Zero(dims.d_a, d);
  p.b_a = Eigen::MatrixXd::Zero(1, d);
  p.w_h1 = Eigen::MatrixXd::Zero(dims.d_h, d);
  p.b_h1 = Eigen::MatrixXd::Zero(1, d);
  p.w_h2 = Eigen::MatrixXd::Zero(d, d);
  p.b_h2 = Eigen::MatrixXd::Zero(1, d);
  p.w1 = Eigen::MatrixXd::Zero(3 * d, d);
  p.b1 = Eigen::MatrixXd::Zero(1, d);
  p.w2 = Eigen::MatrixXd::Zero(d, d);
  p.b2 = Eigen::MatrixXd::Zero(1, d);
  p.w3 = Eigen::MatrixXd::Zero(d, dims.n_classes);
  p.b3 = Eigen::MatrixXd::Zero(1, dims.n_classes);
  return p;
}

MlpParams MlpParams::seeded(const FeatureDims& dims, int d, std::uint64_t seed) {
  Rng rng(seed);
  MlpParams p = zeros(dims, d);
  // He scaling for rectifier layers, Xavier for the logits layer.
  p.w_q = normal_matrix(rng, dims.d_q, d, std::sqrt(2.0 / dims.d_q));
  p.w_a = normal_matrix(rng, dims.d_a, d, std::sqrt(2.0 / dims.d_a));
  p.w_h1 = normal_matrix(rng, dims.d_h, d, std::sqrt(2.0 / dims.d_h));
  p.w_h2 = normal_matrix(rng, d, d, std::sqrt(2.0 / d));
  p.w1 = normal_matrix(rng, 3 * d, d, std::sqrt(2.0 / (3 * d)));
  p.w2 = normal_matrix(rng, d, d, std::sqrt(2.0 / d));
  p.w3 = normal_matrix(rng, d, dims.n_classes, std::sqrt(1.0 / d));
  return p;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> MlpParams::tensors() {
  return {{"w_q", &w_q},   {"b_q", &b_q},   {"w_a", &w_a},   {"b_a", &b_a},
          {"w_h1", &w_h1}, {"b_h1", &b_h1}, {"w_h2", &w_h2}, {"b_h2", &b_h2},
          {"w1", &w1},     {"b1", &b1},     {"w2", &w2},     {"b2", &b2},
          {"w3", &w3},     {"b3", &b3}};
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>> MlpParams::tensors() const {
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> out;
  for (auto& [name, tensor] : const_cast<MlpParams*>(this)->tensors())
    out.emplace_back(name, tensor);
  return out;
}

Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& h,
                            const Eigen::MatrixXd& q, const Eigen::MatrixXd& a,
                            MlpCache* cache) {
  if (h.cols() != params.dims.d_h || q.cols() != params.dims.d_q ||
      a.cols() != params.dims.d_a)
    throw ValidationError("dimension mismatch between record features and selector");

  MlpCache local;
  MlpCache& c = cache ? *cache : local;
  c.zq = relu(affine(q, params.w_q, params.b_q));
  c.za = relu(affine(a, params.w_a, params.b_a));
  c.zh1 = relu(affine(h, params.w_h1, params.b_h1));
  c.zh2 = relu(affine(c.zh1, params.w_h2, params.b_h2));

  const Eigen::Index b = h.rows();
  const int d = params.d;
  c.u.resize(b, 3 * d);
  c.u << c.zh2, c.zq, c.za;

  c.z1 = relu(affine(c.u, params.w1, params.b1));
  c.z2 = relu(affine(c.z1, params.w2, params.b2));
  Eigen::MatrixXd logits = affine(c.z2, params.w3, params.b3);
  if (!logits.allFinite())
    throw ValidationError("non-finite activation in selector forward pass");
  return logits;
}

void mlp_backward(const MlpParams& params, const MlpCache& cache,
                  const Eigen::MatrixXd& h, const Eigen::MatrixXd& q,
                  const Eigen::MatrixXd& a, const Eigen::MatrixXd& grad_logits,
                  MlpParams& grads) {
  const int d = params.d;

  grads.w3 += cache.z2.transpose() * grad_logits;
  grads.b3 += grad_logits.colwise().sum();
  Eigen::MatrixXd g2 =
      ((grad_logits * params.w3.transpose()).array() * relu_mask(cache.z2)).matrix();

  grads.w2 += cache.z1.transpose() * g2;
  grads.b2 += g2.colwise().sum();
  Eigen::MatrixXd g1 =
      ((g2 * params.w2.transpose()).array() * relu_mask(cache.z1)).matrix();

  grads.w1 += cache.u.transpose() * g1;
  grads.b1 += g1.colwise().sum();
  const Eigen::MatrixXd gu = g1 * params.w1.transpose();

  Eigen::MatrixXd gh2 =
      (gu.leftCols(d).array() * relu_mask(cache.zh2)).matrix();
  grads.w_h2 += cache.zh1.transpose() * gh2;
  grads.b_h2 += gh2.colwise().sum();
  Eigen::MatrixXd gh1 =
      ((gh2 * params.w_h2.transpose()).array() * relu_mask(cache.zh1)).matrix();
  grads.w_h1 += h.transpose() * gh1;
  grads.b_h1 += gh1.colwise().sum();

  Eigen::MatrixXd gq = (gu.middleCols(d, d).array() * relu_mask(cache.zq)).matrix();
  grads.w_q += q.transpose() * gq;
  grads.b_q += gq.colwise().sum();

  Eigen::MatrixXd ga = (gu.rightCols(d).array() * relu_mask(cache.za)).matrix();
  grads.w_a += a.transpose() * ga;
  grads.b_a += ga.colwise().sum();
}

}  // namespace abstain::selector
