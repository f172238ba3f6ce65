#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "abstain/selector/mlp.hpp"  // FeatureDims

namespace abstain::selector {

inline constexpr int kNumTokens = 3;  // h, q, a
inline constexpr double kLayerNormEps = 1e-5;

struct EncoderLayerParams {
  Eigen::MatrixXd ln1_gamma, ln1_beta;  // 1 x d
  Eigen::MatrixXd w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o;
  Eigen::MatrixXd ln2_gamma, ln2_beta;
  Eigen::MatrixXd w_ff1, b_ff1;  // d -> 4d
  Eigen::MatrixXd w_ff2, b_ff2;  // 4d -> d
};

// Two-layer pre-norm Transformer encoder over three tokens (projected h, q
// and a, each offset by a learned source embedding); classification reads the
// h token. d must be divisible by n_heads.
struct TransformerParams {
  FeatureDims dims;
  int d = 0;
  int n_heads = 0;

  Eigen::MatrixXd proj_h, pb_h;  // D_h -> d
  Eigen::MatrixXd proj_q, pb_q;
  Eigen::MatrixXd proj_a, pb_a;
  Eigen::MatrixXd src_emb;  // kNumTokens x d

  std::vector<EncoderLayerParams> layers;  // 2

  Eigen::MatrixXd w_cls, b_cls;  // d -> C

  int head_dim() const { return d / n_heads; }
  int d_ff() const { return 4 * d; }

  static TransformerParams zeros(const FeatureDims& dims, int d, int n_heads);
  static TransformerParams seeded(const FeatureDims& dims, int d, int n_heads,
                                  std::uint64_t seed);

  std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensors();
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensors() const;
};

// Batched token layout: row kNumTokens*i + s holds token s of sample i, so
// projections, layer norms and feed-forwards run as single GEMMs over all
// samples while attention works per 3x3 block.
struct TransformerCache {
  Eigen::MatrixXd x0;
  struct Layer {
    Eigen::MatrixXd x_in;    // 3B x d
    Eigen::MatrixXd n1;      // LN1 output
    Eigen::MatrixXd q, k, v;
    Eigen::MatrixXd attn;    // 3B x 3*n_heads, softmaxed per sample/head
    Eigen::MatrixXd h_cat;   // attention-weighted values
    Eigen::MatrixXd x_mid;   // after attention residual
    Eigen::MatrixXd n2;      // LN2 output
    Eigen::MatrixXd z_ff;    // post-rectifier feed-forward hidden
  };
  std::vector<Layer> layers;
  Eigen::MatrixXd x_final;
};

Eigen::MatrixXd transformer_forward(const TransformerParams& params,
                                    const Eigen::MatrixXd& h,
                                    const Eigen::MatrixXd& q,
                                    const Eigen::MatrixXd& a,
                                    TransformerCache* cache = nullptr);

void transformer_backward(const TransformerParams& params, const TransformerCache& cache,
                          const Eigen::MatrixXd& h, const Eigen::MatrixXd& q,
                          const Eigen::MatrixXd& a, const Eigen::MatrixXd& grad_logits,
                          TransformerParams& grads);

}  // namespace abstain::selector
