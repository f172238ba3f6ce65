#include "abstain/selector/transformer.hpp"

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

inline Eigen::MatrixXd affine(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                              const Eigen::MatrixXd& b) {
  return (x * w).rowwise() + b.row(0);
}

// Rowwise layer norm, population variance, eps inside the square root.
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gamma,
                           const Eigen::MatrixXd& beta) {
  const Eigen::VectorXd mean = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - mean;
  const Eigen::ArrayXd inv_std =
      (centered.array().square().rowwise().mean() + kLayerNormEps).sqrt().inverse();
  Eigen::ArrayXXd out = centered.array().colwise() * inv_std;
  out.rowwise() *= gamma.row(0).array();
  out.rowwise() += beta.row(0).array();
  return out.matrix();
}

// Backward through layer_norm; accumulates dgamma/dbeta, returns dx.
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& grad_out,
                                    const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& gamma,
                                    Eigen::MatrixXd& grad_gamma,
                                    Eigen::MatrixXd& grad_beta) {
  const Eigen::VectorXd mean = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - mean;
  const Eigen::ArrayXd inv_std =
      (centered.array().square().rowwise().mean() + kLayerNormEps).sqrt().inverse();
  const Eigen::MatrixXd x_hat = (centered.array().colwise() * inv_std).matrix();

  grad_gamma += (grad_out.array() * x_hat.array()).colwise().sum().matrix();
  grad_beta += grad_out.colwise().sum();

  const Eigen::MatrixXd g_hat =
      (grad_out.array().rowwise() * gamma.row(0).array()).matrix();
  const Eigen::ArrayXd mean_g = g_hat.rowwise().mean();
  const Eigen::ArrayXd mean_gx =
      (g_hat.array() * x_hat.array()).rowwise().mean();
  const Eigen::ArrayXXd dx =
      ((g_hat.array().colwise() - mean_g) - (x_hat.array().colwise() * mean_gx))
          .colwise() *
      inv_std;
  return dx.matrix();
}

}  // namespace

TransformerParams TransformerParams::zeros(const FeatureDims& dims, int d,
                                           int n_heads) {
  if (n_heads <= 0 || d % n_heads != 0)
    throw ValidationError("hidden width must be divisible by n_heads");
  TransformerParams p;
  p.dims = dims;
  p.d = d;
  p.n_heads = n_heads;
  auto zero = [](Eigen::Index r, Eigen::Index c) { return Eigen::MatrixXd::Zero(r, c); };
  p.proj_h = zero(dims.d_h, d);
  p.pb_h = zero(1, d);
  p.proj_q = zero(dims.d_q, d);
  p.pb_q = zero(1, d);
  p.proj_a = zero(dims.d_a, d);
  p.pb_a = zero(1, d);
  p.src_emb = zero(kNumTokens, d);
  p.layers.resize(2);
  for (EncoderLayerParams& layer : p.layers) {
    layer.ln1_gamma = Eigen::MatrixXd::Ones(1, d);
    layer.ln1_beta = zero(1, d);
    layer.w_q = zero(d, d);
    layer.b_q = zero(1, d);
    layer.w_k = zero(d, d);
    layer.b_k = zero(1, d);
    layer.w_v = zero(d, d);
    layer.b_v = zero(1, d);
    layer.w_o = zero(d, d);
    layer.b_o = zero(1, d);
    layer.ln2_gamma = Eigen::MatrixXd::Ones(1, d);
    layer.ln2_beta = zero(1, d);
    layer.w_ff1 = zero(d, 4 * d);
    layer.b_ff1 = zero(1, 4 * d);
    layer.w_ff2 = zero(4 * d, d);
    layer.b_ff2 = zero(1, d);
  }
  p.w_cls = zero(d, dims.n_classes);
  p.b_cls = zero(1, dims.n_classes);
  return p;
}

TransformerParams TransformerParams::seeded(const FeatureDims& dims, int d,
                                            int n_heads, std::uint64_t seed) {
  Rng rng(seed);
  TransformerParams p = zeros(dims, d, n_heads);
  p.proj_h = normal_matrix(rng, dims.d_h, d, std::sqrt(1.0 / dims.d_h));
  p.proj_q = normal_matrix(rng, dims.d_q, d, std::sqrt(1.0 / dims.d_q));
  p.proj_a = normal_matrix(rng, dims.d_a, d, std::sqrt(1.0 / dims.d_a));
  p.src_emb = normal_matrix(rng, kNumTokens, d, 0.02);
  for (EncoderLayerParams& layer : p.layers) {
    layer.w_q = normal_matrix(rng, d, d, std::sqrt(1.0 / d));
    layer.w_k = normal_matrix(rng, d, d, std::sqrt(1.0 / d));
    layer.w_v = normal_matrix(rng, d, d, std::sqrt(1.0 / d));
    layer.w_o = normal_matrix(rng, d, d, std::sqrt(1.0 / d));
    layer.w_ff1 = normal_matrix(rng, d, 4 * d, std::sqrt(2.0 / d));
    layer.w_ff2 = normal_matrix(rng, 4 * d, d, std::sqrt(1.0 / (4.0 * d)));
  }
  p.w_cls = normal_matrix(rng, d, dims.n_classes, std::sqrt(1.0 / d));
  return p;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> TransformerParams::tensors() {
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> out = {
      {"proj_h", &proj_h}, {"pb_h", &pb_h}, {"proj_q", &proj_q}, {"pb_q", &pb_q},
      {"proj_a", &proj_a}, {"pb_a", &pb_a}, {"src_emb", &src_emb}};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    EncoderLayerParams& layer = layers[l];
    out.emplace_back(prefix + "ln1_gamma", &layer.ln1_gamma);
    out.emplace_back(prefix + "ln1_beta", &layer.ln1_beta);
    out.emplace_back(prefix + "w_q", &layer.w_q);
    out.emplace_back(prefix + "b_q", &layer.b_q);
    out.emplace_back(prefix + "w_k", &layer.w_k);
    out.emplace_back(prefix + "b_k", &layer.b_k);
    out.emplace_back(prefix + "w_v", &layer.w_v);
    out.emplace_back(prefix + "b_v", &layer.b_v);
    out.emplace_back(prefix + "w_o", &layer.w_o);
    out.emplace_back(prefix + "b_o", &layer.b_o);
    out.emplace_back(prefix + "ln2_gamma", &layer.ln2_gamma);
    out.emplace_back(prefix + "ln2_beta", &layer.ln2_beta);
    out.emplace_back(prefix + "w_ff1", &layer.w_ff1);
    out.emplace_back(prefix + "b_ff1", &layer.b_ff1);
    out.emplace_back(prefix + "w_ff2", &layer.w_ff2);
    out.emplace_back(prefix + "b_ff2", &layer.b_ff2);
  }
  out.emplace_back("w_cls", &w_cls);
  out.emplace_back("b_cls", &b_cls);
  return out;
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>>
TransformerParams::tensors() const {
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> out;
  for (auto& [name, tensor] : const_cast<TransformerParams*>(this)->tensors())
    out.emplace_back(name, tensor);
  return out;
}

Eigen::MatrixXd transformer_forward(const TransformerParams& params,
                                    const Eigen::MatrixXd& h,
                                    const Eigen::MatrixXd& q,
                                    const Eigen::MatrixXd& a,
                                    TransformerCache* cache) {
  if (h.cols() != params.dims.d_h || q.cols() != params.dims.d_q ||
      a.cols() != params.dims.d_a)
    throw ValidationError("dimension mismatch between record features and selector");

  const Eigen::Index b = h.rows();
  const int d = params.d;
  const int n_heads = params.n_heads;
  const int dh = params.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  TransformerCache local;
  TransformerCache& c = cache ? *cache : local;
  c.layers.resize(params.layers.size());

  const Eigen::MatrixXd th =
      (affine(h, params.proj_h, params.pb_h)).rowwise() + params.src_emb.row(0);
  const Eigen::MatrixXd tq =
      (affine(q, params.proj_q, params.pb_q)).rowwise() + params.src_emb.row(1);
  const Eigen::MatrixXd ta =
      (affine(a, params.proj_a, params.pb_a)).rowwise() + params.src_emb.row(2);
  c.x0.resize(kNumTokens * b, d);
  for (Eigen::Index i = 0; i < b; ++i) {
    c.x0.row(kNumTokens * i + 0) = th.row(i);
    c.x0.row(kNumTokens * i + 1) = tq.row(i);
    c.x0.row(kNumTokens * i + 2) = ta.row(i);
  }

  Eigen::MatrixXd x = c.x0;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const EncoderLayerParams& lp = params.layers[l];
    TransformerCache::Layer& lc = c.layers[l];
    lc.x_in = x;

    lc.n1 = layer_norm(x, lp.ln1_gamma, lp.ln1_beta);
    lc.q = affine(lc.n1, lp.w_q, lp.b_q);
    lc.k = affine(lc.n1, lp.w_k, lp.b_k);
    lc.v = affine(lc.n1, lp.w_v, lp.b_v);

    lc.attn.resize(kNumTokens * b, kNumTokens * n_heads);
    lc.h_cat.resize(kNumTokens * b, d);
    for (Eigen::Index i = 0; i < b; ++i) {
      const Eigen::Index r0 = kNumTokens * i;
      for (int j = 0; j < n_heads; ++j) {
        const Eigen::Index c0 = static_cast<Eigen::Index>(j) * dh;
        Eigen::Matrix3d s = scale * lc.q.block(r0, c0, kNumTokens, dh) *
                            lc.k.block(r0, c0, kNumTokens, dh).transpose();
        for (int row = 0; row < kNumTokens; ++row) {
          const Eigen::Array3d shifted =
              s.row(row).transpose().array() - s.row(row).maxCoeff();
          const Eigen::Array3d e = shifted.exp();
          s.row(row) = (e / e.sum()).matrix().transpose();
        }
        lc.attn.block(r0, kNumTokens * j, kNumTokens, kNumTokens) = s;
        lc.h_cat.block(r0, c0, kNumTokens, dh) =
            s * lc.v.block(r0, c0, kNumTokens, dh);
      }
    }

    lc.x_mid = x + affine(lc.h_cat, lp.w_o, lp.b_o);
    lc.n2 = layer_norm(lc.x_mid, lp.ln2_gamma, lp.ln2_beta);
    lc.z_ff = affine(lc.n2, lp.w_ff1, lp.b_ff1).cwiseMax(0.0);
    x = lc.x_mid + affine(lc.z_ff, lp.w_ff2, lp.b_ff2);
  }
  c.x_final = x;

  Eigen::MatrixXd h_tokens(b, d);
  for (Eigen::Index i = 0; i < b; ++i) h_tokens.row(i) = x.row(kNumTokens * i);
  Eigen::MatrixXd logits = affine(h_tokens, params.w_cls, params.b_cls);
  if (!logits.allFinite())
    throw ValidationError("non-finite activation in selector forward pass");
  return logits;
}

void transformer_backward(const TransformerParams& params,
                          const TransformerCache& cache, const Eigen::MatrixXd& h,
                          const Eigen::MatrixXd& q, const Eigen::MatrixXd& a,
                          const Eigen::MatrixXd& grad_logits,
                          TransformerParams& grads) {
  const Eigen::Index b = h.rows();
  const int d = params.d;
  const int n_heads = params.n_heads;
  const int dh = params.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Eigen::MatrixXd h_tokens(b, d);
  for (Eigen::Index i = 0; i < b; ++i)
    h_tokens.row(i) = cache.x_final.row(kNumTokens * i);
  grads.w_cls += h_tokens.transpose() * grad_logits;
  grads.b_cls += grad_logits.colwise().sum();

  Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(kNumTokens * b, d);
  const Eigen::MatrixXd g_h_tokens = grad_logits * params.w_cls.transpose();
  for (Eigen::Index i = 0; i < b; ++i) gx.row(kNumTokens * i) = g_h_tokens.row(i);

  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const EncoderLayerParams& lp = params.layers[l];
    const TransformerCache::Layer& lc = cache.layers[l];
    EncoderLayerParams& lg = grads.layers[l];

    // Feed-forward sublayer: x_out = x_mid + relu(n2 w1 + b1) w2 + b2.
    lg.w_ff2 += lc.z_ff.transpose() * gx;
    lg.b_ff2 += gx.colwise().sum();
    Eigen::MatrixXd g_zff = gx * lp.w_ff2.transpose();
    g_zff.array() *= (lc.z_ff.array() > 0.0).cast<double>();
    lg.w_ff1 += lc.n2.transpose() * g_zff;
    lg.b_ff1 += g_zff.colwise().sum();
    const Eigen::MatrixXd g_n2 = g_zff * lp.w_ff1.transpose();
    Eigen::MatrixXd g_xmid =
        gx + layer_norm_backward(g_n2, lc.x_mid, lp.ln2_gamma, lg.ln2_gamma,
                                 lg.ln2_beta);

    // Attention sublayer: x_mid = x_in + (heads(n1)) w_o + b_o.
    lg.w_o += lc.h_cat.transpose() * g_xmid;
    lg.b_o += g_xmid.colwise().sum();
    const Eigen::MatrixXd g_hcat = g_xmid * lp.w_o.transpose();

    Eigen::MatrixXd g_q = Eigen::MatrixXd::Zero(kNumTokens * b, d);
    Eigen::MatrixXd g_k = Eigen::MatrixXd::Zero(kNumTokens * b, d);
    Eigen::MatrixXd g_v = Eigen::MatrixXd::Zero(kNumTokens * b, d);
    for (Eigen::Index i = 0; i < b; ++i) {
      const Eigen::Index r0 = kNumTokens * i;
      for (int j = 0; j < n_heads; ++j) {
        const Eigen::Index c0 = static_cast<Eigen::Index>(j) * dh;
        const Eigen::Matrix3d attn =
            lc.attn.block(r0, kNumTokens * j, kNumTokens, kNumTokens);
        const auto v_blk = lc.v.block(r0, c0, kNumTokens, dh);
        const auto g_blk = g_hcat.block(r0, c0, kNumTokens, dh);

        const Eigen::Matrix3d g_attn = g_blk * v_blk.transpose();
        g_v.block(r0, c0, kNumTokens, dh) = attn.transpose() * g_blk;

        // Softmax rows: ds = a .* (dg - rowsum(dg .* a)).
        Eigen::Matrix3d g_scores;
        for (int row = 0; row < kNumTokens; ++row) {
          const double dot = g_attn.row(row).dot(attn.row(row));
          g_scores.row(row) =
              (attn.row(row).array() * (g_attn.row(row).array() - dot)).matrix();
        }
        g_scores *= scale;
        g_q.block(r0, c0, kNumTokens, dh) =
            g_scores * lc.k.block(r0, c0, kNumTokens, dh);
        g_k.block(r0, c0, kNumTokens, dh) =
            g_scores.transpose() * lc.q.block(r0, c0, kNumTokens, dh);
      }
    }

    lg.w_q += lc.n1.transpose() * g_q;
    lg.b_q += g_q.colwise().sum();
    lg.w_k += lc.n1.transpose() * g_k;
    lg.b_k += g_k.colwise().sum();
    lg.w_v += lc.n1.transpose() * g_v;
    lg.b_v += g_v.colwise().sum();
    const Eigen::MatrixXd g_n1 =
        g_q * lp.w_q.transpose() + g_k * lp.w_k.transpose() + g_v * lp.w_v.transpose();
    gx = g_xmid + layer_norm_backward(g_n1, lc.x_in, lp.ln1_gamma, lg.ln1_gamma,
                                      lg.ln1_beta);
  }

  // Embedding stage.
  Eigen::MatrixXd g_th(b, d), g_tq(b, d), g_ta(b, d);
  for (Eigen::Index i = 0; i < b; ++i) {
    g_th.row(i) = gx.row(kNumTokens * i + 0);
    g_tq.row(i) = gx.row(kNumTokens * i + 1);
    g_ta.row(i) = gx.row(kNumTokens * i + 2);
  }
  grads.proj_h += h.transpose() * g_th;
  grads.pb_h += g_th.colwise().sum();
  grads.src_emb.row(0) += g_th.colwise().sum();
  grads.proj_q += q.transpose() * g_tq;
  grads.pb_q += g_tq.colwise().sum();
  grads.src_emb.row(1) += g_tq.colwise().sum();
  grads.proj_a += a.transpose() * g_ta;
  grads.pb_a += g_ta.colwise().sum();
  grads.src_emb.row(2) += g_ta.colwise().sum();
}

}  // namespace abstain::selector
