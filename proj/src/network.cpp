#include "cqre/network.hpp"

#include <cmath>
#include <stdexcept>

#include "cqre/rng.hpp"

namespace cqre::mdn {

namespace {

constexpr double kLogSigmaClamp = 20.0;

void check_forward_shapes(const NetworkWeights& w, const Eigen::VectorXd& x) {
  if (x.size() != w.hidden_w.cols()) {
    throw std::invalid_argument("mlp_forward: input length " +
                                std::to_string(x.size()) +
                                " does not match n_inputs " +
                                std::to_string(w.hidden_w.cols()));
  }
}

}  // namespace

void MdnConfig::validate() const {
  if (n_inputs < 1 || n_hidden < 1 || n_mixtures < 1 || target_dim < 1) {
    throw std::invalid_argument(
        "MdnConfig: n_inputs, n_hidden, n_mixtures and target_dim must all "
        "be >= 1");
  }
  if (train_cycles < 0) {
    throw std::invalid_argument("MdnConfig: train_cycles must be >= 0");
  }
}

Eigen::Index NetworkWeights::parameter_count() const {
  return hidden_w.size() + hidden_b.size() + output_w.size() + output_b.size();
}

bool NetworkWeights::all_finite() const {
  return hidden_w.allFinite() && hidden_b.allFinite() &&
         output_w.allFinite() && output_b.allFinite();
}

Eigen::VectorXd NetworkWeights::flatten() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index at = 0;
  for (Eigen::Index r = 0; r < hidden_w.rows(); ++r) {
    for (Eigen::Index c = 0; c < hidden_w.cols(); ++c) {
      flat[at++] = hidden_w(r, c);
    }
  }
  for (Eigen::Index i = 0; i < hidden_b.size(); ++i) flat[at++] = hidden_b[i];
  for (Eigen::Index r = 0; r < output_w.rows(); ++r) {
    for (Eigen::Index c = 0; c < output_w.cols(); ++c) {
      flat[at++] = output_w(r, c);
    }
  }
  for (Eigen::Index i = 0; i < output_b.size(); ++i) flat[at++] = output_b[i];
  return flat;
}

NetworkWeights NetworkWeights::zeros(const MdnConfig& config) {
  config.validate();
  NetworkWeights w;
  w.hidden_w = Eigen::MatrixXd::Zero(config.n_hidden, config.n_inputs);
  w.hidden_b = Eigen::VectorXd::Zero(config.n_hidden);
  w.output_w = Eigen::MatrixXd::Zero(config.output_width(), config.n_hidden);
  w.output_b = Eigen::VectorXd::Zero(config.output_width());
  return w;
}

NetworkWeights NetworkWeights::unflatten(const Eigen::VectorXd& flat,
                                         const MdnConfig& config) {
  NetworkWeights w = zeros(config);
  if (flat.size() != w.parameter_count()) {
    throw std::invalid_argument("unflatten: parameter count mismatch");
  }
  Eigen::Index at = 0;
  for (Eigen::Index r = 0; r < w.hidden_w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.hidden_w.cols(); ++c) {
      w.hidden_w(r, c) = flat[at++];
    }
  }
  for (Eigen::Index i = 0; i < w.hidden_b.size(); ++i) {
    w.hidden_b[i] = flat[at++];
  }
  for (Eigen::Index r = 0; r < w.output_w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.output_w.cols(); ++c) {
      w.output_w(r, c) = flat[at++];
    }
  }
  for (Eigen::Index i = 0; i < w.output_b.size(); ++i) {
    w.output_b[i] = flat[at++];
  }
  return w;
}

NetworkWeights init_weights(const MdnConfig& config) {
  config.validate();
  NetworkWeights w = NetworkWeights::zeros(config);
  Rng rng(config.seed);
  const double hidden_scale = 1.0 / std::sqrt(config.n_inputs);
  for (Eigen::Index r = 0; r < w.hidden_w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.hidden_w.cols(); ++c) {
      w.hidden_w(r, c) = rng.uniform(-hidden_scale, hidden_scale);
    }
  }
  const double output_scale = 1.0 / std::sqrt(config.n_hidden);
  for (Eigen::Index r = 0; r < w.output_w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.output_w.cols(); ++c) {
      w.output_w(r, c) = rng.uniform(-output_scale, output_scale);
    }
  }
  return w;
}

Eigen::VectorXd mlp_forward(const NetworkWeights& weights,
                            const Eigen::VectorXd& x) {
  check_forward_shapes(weights, x);
  const Eigen::VectorXd hidden =
      ((weights.hidden_w * x + weights.hidden_b).array().tanh()).matrix();
  return weights.output_w * hidden + weights.output_b;
}

MixtureParams activate(const Eigen::VectorXd& z, int n_mixtures,
                       int target_dim) {
  const int m = n_mixtures;
  const int c = target_dim;
  if (z.size() != static_cast<Eigen::Index>((c + 2) * m)) {
    throw std::invalid_argument("activate: raw output width mismatch");
  }
  MixtureParams params;
  const Eigen::VectorXd za = z.head(m);
  const double hi = za.maxCoeff();
  Eigen::VectorXd expd = (za.array() - hi).exp();
  params.alphas = expd / expd.sum();
  params.sigmas.resize(m);
  for (int i = 0; i < m; ++i) {
    const double zs =
        std::clamp(z[m + i], -kLogSigmaClamp, kLogSigmaClamp);
    params.sigmas[i] = std::exp(zs);
  }
  params.mus.resize(m, c);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < c; ++k) {
      params.mus(i, k) = z[2 * m + i * c + k];
    }
  }
  return params;
}

Eigen::VectorXd output_gradients(const MixtureParams& params,
                                 const Eigen::VectorXd& t) {
  const int m = params.components();
  const int c = params.target_dim();
  if (t.size() != c) {
    throw std::invalid_argument("output_gradients: target dimension mismatch");
  }
  const Eigen::VectorXd pi = posterior(params, t);
  Eigen::VectorXd grad((c + 2) * m);
  for (int i = 0; i < m; ++i) {
    const double var = params.sigmas[i] * params.sigmas[i];
    const Eigen::RowVectorXd residual = params.mus.row(i) - t.transpose();
    grad[i] = params.alphas[i] - pi[i];
    grad[m + i] = pi[i] * (c - residual.squaredNorm() / var);
    for (int k = 0; k < c; ++k) {
      grad[2 * m + i * c + k] = pi[i] * residual[k] / var;
    }
  }
  return grad;
}

NetworkWeights backprop(const NetworkWeights& weights,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
  check_forward_shapes(weights, x);
  const int m = static_cast<int>(weights.output_w.rows()) /
                (2 + static_cast<int>(t.size()));
  const Eigen::VectorXd hidden =
      ((weights.hidden_w * x + weights.hidden_b).array().tanh()).matrix();
  const Eigen::VectorXd z = weights.output_w * hidden + weights.output_b;
  const MixtureParams params = activate(z, m, static_cast<int>(t.size()));
  const Eigen::VectorXd delta_out = output_gradients(params, t);
  const Eigen::VectorXd delta_hidden =
      ((weights.output_w.transpose() * delta_out).array() *
       (1.0 - hidden.array().square()))
          .matrix();
  NetworkWeights grad;
  grad.output_w = delta_out * hidden.transpose();
  grad.output_b = delta_out;
  grad.hidden_w = delta_hidden * x.transpose();
  grad.hidden_b = delta_hidden;
  return grad;
}

double nll_and_gradient(const NetworkWeights& weights, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& T, NetworkWeights* grad) {
  if (X.rows() != T.rows()) {
    throw std::invalid_argument("nll_and_gradient: X/T row count mismatch");
  }
  const int m = static_cast<int>(weights.output_w.rows()) /
                (2 + static_cast<int>(T.cols()));
  if (grad != nullptr) {
    grad->hidden_w = Eigen::MatrixXd::Zero(weights.hidden_w.rows(),
                                           weights.hidden_w.cols());
    grad->hidden_b = Eigen::VectorXd::Zero(weights.hidden_b.size());
    grad->output_w = Eigen::MatrixXd::Zero(weights.output_w.rows(),
                                           weights.output_w.cols());
    grad->output_b = Eigen::VectorXd::Zero(weights.output_b.size());
  }
  double loss = 0.0;
  for (Eigen::Index n = 0; n < X.rows(); ++n) {
    const Eigen::VectorXd x = X.row(n);
    const Eigen::VectorXd t = T.row(n);
    const Eigen::VectorXd hidden =
        ((weights.hidden_w * x + weights.hidden_b).array().tanh()).matrix();
    const Eigen::VectorXd z = weights.output_w * hidden + weights.output_b;
    const MixtureParams params = activate(z, m, static_cast<int>(T.cols()));
    loss += nll(params, t);
    if (grad != nullptr) {
      const Eigen::VectorXd delta_out = output_gradients(params, t);
      const Eigen::VectorXd delta_hidden =
          ((weights.output_w.transpose() * delta_out).array() *
           (1.0 - hidden.array().square()))
              .matrix();
      grad->output_w.noalias() += delta_out * hidden.transpose();
      grad->output_b += delta_out;
      grad->hidden_w.noalias() += delta_hidden * x.transpose();
      grad->hidden_b += delta_hidden;
    }
  }
  return loss;
}

}  // namespace cqre::mdn
