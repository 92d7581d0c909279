#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "cqre/mixture.hpp"

namespace cqre::mdn {

// Architecture and training knobs for one density network. The raw output
// layer is (target_dim + 2) * n_mixtures wide: one block of mixing logits,
// one block of log-sigma outputs, then the component means.
struct MdnConfig {
  int n_inputs = 1;
  int n_hidden = 5;
  int n_mixtures = 3;
  int target_dim = 1;
  int train_cycles = 200;
  std::uint64_t seed = 0;

  int output_width() const { return (target_dim + 2) * n_mixtures; }
  void validate() const;  // throws std::invalid_argument on bad dimensions
};

// Single hidden layer (tanh) + linear output layer.
struct NetworkWeights {
  Eigen::MatrixXd hidden_w;  // n_hidden x n_inputs
  Eigen::VectorXd hidden_b;  // n_hidden
  Eigen::MatrixXd output_w;  // output_width x n_hidden
  Eigen::VectorXd output_b;  // output_width

  Eigen::Index parameter_count() const;
  bool all_finite() const;

  // Row-major packing [hidden_w, hidden_b, output_w, output_b]; the order
  // the optimizer and the model file both use.
  Eigen::VectorXd flatten() const;
  static NetworkWeights unflatten(const Eigen::VectorXd& flat,
                                  const MdnConfig& config);
  static NetworkWeights zeros(const MdnConfig& config);
};

// Fresh weights: uniform in +/- 1/sqrt(fan-in), biases zero, deterministic
// for a given config.seed. Zero output biases put the initial sigmas at 1.
NetworkWeights init_weights(const MdnConfig& config);

// One forward pass to the raw output vector z.
Eigen::VectorXd mlp_forward(const NetworkWeights& weights,
                            const Eigen::VectorXd& x);

// Raw outputs -> mixture parameters: softmax over the mixing block
// (max-subtracted), exp over the log-sigma block (clamped to +/-20 before
// exp so sigma stays in a representable range), means passed through.
MixtureParams activate(const Eigen::VectorXd& z, int n_mixtures,
                       int target_dim);

// Gradient of the per-sample NLL with respect to the raw outputs z,
// laid out like z itself.
Eigen::VectorXd output_gradients(const MixtureParams& params,
                                 const Eigen::VectorXd& t);

// Gradient of the per-sample NLL with respect to every weight.
NetworkWeights backprop(const NetworkWeights& weights,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& t);

// Batch objective over normalized rows: sum of per-sample NLL, gradient
// accumulated in row order. grad may be null when only the value is needed.
double nll_and_gradient(const NetworkWeights& weights, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& T, NetworkWeights* grad);

}  // namespace cqre::mdn
