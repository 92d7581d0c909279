#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqre/network.hpp"

namespace cqre::mdn {

struct TrainResult {
  NetworkWeights weights;
  std::vector<double> nll_per_cycle;  // index 0 holds the initial loss
  double final_nll = 0.0;
  int cycles = 0;
  std::string stop_reason;
};

using CycleCallback =
    std::function<void(int cycle, const NetworkWeights& weights, double nll)>;

// Fits the network on normalized inputs X (N x n_inputs) and targets
// T (N x target_dim) by scaled conjugate gradient descent on the summed
// negative log likelihood. A non-finite loss or gradient aborts with a
// diagnostic naming the cycle and the current parameter norms.
TrainResult train_mdn(const MdnConfig& config, const Eigen::MatrixXd& X,
                      const Eigen::MatrixXd& T,
                      const CycleCallback& on_cycle = nullptr);

}  // namespace cqre::mdn
