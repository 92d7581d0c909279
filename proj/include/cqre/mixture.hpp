#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cqre/rng.hpp"

namespace cqre::mdn {

// Gaussian mixture emitted by the network for one input: M spherical
// components over a target of dimension c. Kept in normalized target units.
struct MixtureParams {
  Eigen::VectorXd alphas;  // M mixing coefficients, on the simplex
  Eigen::MatrixXd mus;     // M x c component means
  Eigen::VectorXd sigmas;  // M per-component standard deviations, > 0

  int components() const { return static_cast<int>(alphas.size()); }
  int target_dim() const { return static_cast<int>(mus.cols()); }
};

// log p(t | params), evaluated with log-sum-exp over components.
double log_density(const MixtureParams& params, const Eigen::VectorXd& t);
double log_density(const MixtureParams& params, double t);

// p(t | params); underflows toward 0 for far-out t, never negative.
double density(const MixtureParams& params, const Eigen::VectorXd& t);
double density(const MixtureParams& params, double t);

// Per-sample negative log likelihood, -log_density.
double nll(const MixtureParams& params, const Eigen::VectorXd& t);
double nll(const MixtureParams& params, double t);

// Batch loss: sum of per-sample NLL over (params[i], targets.row(i)).
double nll_sum(const std::vector<MixtureParams>& params,
               const Eigen::MatrixXd& targets);

// Component responsibilities pi_i = alpha_i phi_i(t) / sum_j alpha_j phi_j(t).
Eigen::VectorXd posterior(const MixtureParams& params,
                          const Eigen::VectorXd& t);

struct MixtureMoments {
  double mean;
  double variance;
};

// Mean and variance of a scalar mixture (target_dim must be 1).
MixtureMoments mixture_stats(const MixtureParams& params);

// CDF of a scalar mixture at x.
double mixture_cdf(const MixtureParams& params, double x);

// Median of a scalar mixture, bisection on cdf(m) = 0.5 over the bracket
// [min(mu) - 12 max(sigma), max(mu) + 12 max(sigma)]. The final bracket is
// driven well below tol, so cdf(median) = 0.5 holds to ~1e-12 even for
// sharp mixtures; the midpoint of the last bracket is returned.
double mixture_median(const MixtureParams& params, double tol = 1e-8);

// n draws from a scalar mixture: component index ~ alphas, then a normal
// draw from that component.
std::vector<double> sample(const MixtureParams& params, Rng& rng, int n);

// Evaluation grid over the mixture support, for export and plotting.
struct PdfGrid {
  Eigen::VectorXd t;
  Eigen::VectorXd density;
  Eigen::VectorXd cdf;
};
PdfGrid pdf_grid(const MixtureParams& params, int points = 512);

// Support bracket [min(mu) - spread*max(sigma), max(mu) + spread*max(sigma)]
// used by the median search, quadrature and grid export.
std::pair<double, double> support_bracket(const MixtureParams& params,
                                          double spread = 12.0);

// Standard normal pdf/cdf helpers shared across the library.
double normal_pdf(double z);
double normal_cdf(double z);

}  // namespace cqre::mdn
