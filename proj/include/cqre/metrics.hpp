#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqre/mixture.hpp"

namespace cqre::metrics {

// Continuous ranked probability score of a scalar Gaussian mixture against
// one observation, in closed form. For component widths s and offsets m the
// building block is A(m, s) = m (2 Phi(m/s) - 1) + 2 s phi(m/s), the
// expectation of |X| for X ~ N(m, s^2).
double crps_sample(const mdn::MixtureParams& params, double t);

// Same score by adaptive quadrature of (F(y) - step(y - t))^2. Slow; kept
// as an independent cross-check of the closed form.
double crps_quadrature(const mdn::MixtureParams& params, double t,
                       double tol = 1e-10);

// Averages over a test set: one predicted mixture per observed target.
double crps_mean(const std::vector<mdn::MixtureParams>& preds,
                 const Eigen::VectorXd& targets);
double nlpd_mean(const std::vector<mdn::MixtureParams>& preds,
                 const Eigen::VectorXd& targets);
double mse_median(const std::vector<mdn::MixtureParams>& preds,
                  const Eigen::VectorXd& targets);

struct ScoreReport {
  double crps = 0.0;
  double nlpd = 0.0;
  double mse = 0.0;
  int rows = 0;
};

ScoreReport score_all(const std::vector<mdn::MixtureParams>& preds,
                      const Eigen::VectorXd& targets);

std::string render_table(const ScoreReport& report);
void save_report(const ScoreReport& report, const std::string& path);

}  // namespace cqre::metrics
