#include "cqre/scg.hpp"

#include <cmath>
#include <limits>

namespace cqre::mdn {

ScgResult scg_minimize(const ScgObjective& objective, Eigen::VectorXd x0,
                       const ScgOptions& options) {
  constexpr double kBetaMin = 1e-15;
  constexpr double kBetaMax = 1e100;
  const double eps = std::numeric_limits<double>::epsilon();
  const auto ndim = x0.size();

  ScgResult result;
  result.x = std::move(x0);

  Eigen::VectorXd grad_new(ndim), grad_old(ndim), grad_plus(ndim);
  double f_old = objective(result.x, grad_new);
  double f_now = f_old;
  result.f_per_cycle.push_back(f_now);
  if (!std::isfinite(f_now) || !grad_new.allFinite()) {
    result.f = f_now;
    result.stop_reason = "non-finite objective";
    return result;
  }
  grad_old = grad_new;

  Eigen::VectorXd direction = -grad_new;
  bool success = true;
  int nsuccess = 0;
  double beta = 1.0;
  double mu = 0.0;
  double kappa = 0.0;
  double theta = 0.0;
  result.stop_reason = "max cycles";

  int cycle = 0;
  for (cycle = 1; cycle <= options.max_cycles; ++cycle) {
    if (success) {
      mu = direction.dot(grad_new);
      if (mu >= 0.0) {
        direction = -grad_new;
        mu = direction.dot(grad_new);
      }
      kappa = direction.squaredNorm();
      if (kappa < eps) {
        result.stop_reason = "degenerate direction";
        --cycle;
        break;
      }
      const double sigma = options.initial_sigma / std::sqrt(kappa);
      Eigen::VectorXd x_plus = result.x + sigma * direction;
      objective(x_plus, grad_plus);
      theta = direction.dot(grad_plus - grad_new) / sigma;
    }

    // Raise the effective curvature until the model is positive definite
    // along the search direction.
    double delta = theta + beta * kappa;
    if (delta <= 0.0) {
      delta = beta * kappa;
      beta = beta - theta / kappa;
    }
    const double alpha = -mu / delta;

    Eigen::VectorXd x_new = result.x + alpha * direction;
    Eigen::VectorXd grad_scratch(ndim);
    const double f_new = objective(x_new, grad_scratch);

    // Comparison ratio between actual and predicted decrease; the step is
    // accepted only when the objective did not increase.
    const double ratio = 2.0 * (f_new - f_old) / (alpha * mu);
    if (ratio >= 0.0) {
      success = true;
      ++nsuccess;
      result.x = std::move(x_new);
      f_now = f_new;
    } else {
      success = false;
      f_now = f_old;
    }

    result.f_per_cycle.push_back(f_now);
    if (!std::isfinite(f_now)) {
      result.stop_reason = "non-finite objective";
      break;
    }
    if (options.on_cycle) options.on_cycle(cycle, result.x, f_now);

    if (success) {
      f_old = f_new;
      grad_old = grad_new;
      grad_new = grad_scratch;  // gradient at the accepted point
      if (!grad_new.allFinite()) {
        result.stop_reason = "non-finite gradient";
        break;
      }
      if (grad_new.norm() < options.grad_tolerance) {
        result.stop_reason = "gradient tolerance";
        break;
      }
    }

    if (ratio < 0.25) beta = std::min(4.0 * beta, kBetaMax);
    if (ratio > 0.75) beta = std::max(0.5 * beta, kBetaMin);

    if (nsuccess == ndim) {
      // Restart along the steepest descent direction.
      direction = -grad_new;
      beta = 1.0;
      nsuccess = 0;
    } else if (success) {
      const double gamma = (grad_old - grad_new).dot(grad_new) / mu;
      direction = gamma * direction - grad_new;
    }
  }

  result.cycles = std::min(cycle, options.max_cycles);
  result.f = f_now;
  return result;
}

}  // namespace cqre::mdn
