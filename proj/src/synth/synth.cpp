#include "abstain/synth/synth.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>

#include "abstain/common/error.hpp"
#include "abstain/common/rng.hpp"

namespace abstain::synth {
namespace {

// First C columns of a seeded random orthonormal basis of R^{d_h}.
Eigen::MatrixXd class_directions(int d_h, int n_classes, Rng& rng) {
  Eigen::MatrixXd g(d_h, n_classes);
  for (int r = 0; r < d_h; ++r)
    for (int c = 0; c < n_classes; ++c) g(r, c) = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d_h, n_classes);
  // Fix signs so the basis is a deterministic function of the Gaussian draw.
  for (int c = 0; c < n_classes; ++c) {
    if (q(0, c) < 0.0) q.col(c) = -q.col(c);
  }
  return q;
}

Eigen::VectorXf noise_vector(int dim, double scale, Rng& rng) {
  Eigen::VectorXf v(dim);
  for (int i = 0; i < dim; ++i) v[i] = static_cast<float>(scale * rng.normal());
  return v;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_samples <= 0) throw ValidationError("n_samples must be positive");
  if (d_h <= 0 || d_q <= 0 || d_a <= 0) throw ValidationError("dims must be positive");
  if (d_h < class_map.size())
    throw ValidationError("d_h must be at least the class count for orthonormal directions");
  if (static_cast<int>(prior.size()) != class_map.size())
    throw ValidationError("prior must have one weight per class");
  double total = 0.0;
  for (double p : prior) {
    if (p < 0.0) throw ValidationError("prior weights must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("prior must sum to 1");
  if (signal_strength < 0.0 || noise_scale < 0.0)
    throw ValidationError("signal and noise scales must be nonnegative");
}

SynthResult generate_synthetic(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int n_classes = config.class_map.size();
  const Eigen::MatrixXd mu = class_directions(config.d_h, n_classes, rng);

  SynthResult result;
  result.dataset.manifest.d_h = config.d_h;
  result.dataset.manifest.d_q = config.d_q;
  result.dataset.manifest.d_a = config.d_a;
  result.dataset.manifest.class_map = config.class_map;
  result.dataset.manifest.feature_encoding = config.encoding;
  result.dataset.records.reserve(static_cast<std::size_t>(config.n_samples));
  result.oracle.reserve(static_cast<std::size_t>(config.n_samples));

  std::vector<double> cumulative(config.prior.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < config.prior.size(); ++c) {
    acc += config.prior[c];
    cumulative[c] = acc;
  }

  for (int i = 0; i < config.n_samples; ++i) {
    const double u = rng.uniform01();
    int cls = n_classes - 1;
    for (std::size_t c = 0; c < cumulative.size(); ++c) {
      if (u < cumulative[c]) {
        cls = static_cast<int>(c);
        break;
      }
    }

    core::FeatureRecord rec;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "synth-%06d", i);
    rec.id = buf;
    rec.question_text = "what is in sample " + std::to_string(i) + "?";
    rec.answer_text = "label-" + std::to_string(cls);
    rec.h = noise_vector(config.d_h, config.noise_scale, rng);
    rec.h += (config.signal_strength * mu.col(cls)).cast<float>();
    rec.q = noise_vector(config.d_q, config.noise_scale, rng);
    rec.a = noise_vector(config.d_a, config.noise_scale, rng);
    rec.accuracy = config.class_map.value(cls);
    rec.class_index = cls;

    // Posterior over classes given the stored (float-precision) h. Unit-norm
    // directions make the quadratic term class-independent:
    // log p(c|h) = log prior_c + signal * <h, mu_c> / noise^2 + const.
    double confidence;
    if (config.noise_scale == 0.0 || config.signal_strength == 0.0) {
      confidence = 0.0;
      if (config.noise_scale == 0.0 && config.signal_strength > 0.0) {
        confidence = config.class_map.value(cls);  // posterior is one-hot
      } else {
        for (std::size_t c = 0; c < config.prior.size(); ++c)
          confidence += config.prior[c] * config.class_map.value(static_cast<int>(c));
      }
    } else {
      const Eigen::VectorXd h64 = rec.h.cast<double>();
      Eigen::VectorXd log_post(n_classes);
      const double scale =
          config.signal_strength / (config.noise_scale * config.noise_scale);
      for (int c = 0; c < n_classes; ++c) {
        log_post[c] = std::log(std::max(config.prior[static_cast<std::size_t>(c)],
                                        1e-300)) +
                      scale * h64.dot(mu.col(c));
      }
      const double m = log_post.maxCoeff();
      const Eigen::ArrayXd w = (log_post.array() - m).exp();
      const Eigen::ArrayXd post = w / w.sum();
      confidence = 0.0;
      for (int c = 0; c < n_classes; ++c)
        confidence += post[c] * config.class_map.value(c);
    }

    result.oracle.push_back(std::min(1.0, std::max(0.0, confidence)));
    result.dataset.records.push_back(std::move(rec));
  }
  result.dataset.manifest.record_count =
      static_cast<std::int64_t>(result.dataset.records.size());
  return result;
}

}  // namespace abstain::synth
