#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace cqre::mdn {

// Objective for the optimizer: returns f(x) and fills grad (same size as x).
using ScgObjective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct ScgOptions {
  int max_cycles = 200;
  double grad_tolerance = 1e-6;  // stop when ||grad||_2 falls below this
  double initial_sigma = 1e-4;   // step scale for the curvature probe
  // Called after every cycle with the currently accepted point.
  std::function<void(int cycle, const Eigen::VectorXd& x, double f)>
      on_cycle;
};

struct ScgResult {
  Eigen::VectorXd x;
  double f = 0.0;
  // f_per_cycle[0] is the initial objective; each following entry is the
  // accepted objective after that cycle (unchanged on rejected steps), so
  // the trace is non-increasing.
  std::vector<double> f_per_cycle;
  int cycles = 0;
  std::string stop_reason;
};

// Scaled conjugate gradient minimizer (Moller): no line search, the step
// size comes from a one-sided curvature estimate guarded by a
// Levenberg-Marquardt style scale that grows on rejected steps.
ScgResult scg_minimize(const ScgObjective& objective, Eigen::VectorXd x0,
                       const ScgOptions& options);

}  // namespace cqre::mdn
