#include "cqre/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cqre::mdn {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2*pi)

void check_target(const MixtureParams& params, const Eigen::VectorXd& t) {
  if (t.size() != params.mus.cols()) {
    throw std::invalid_argument("target dimension does not match mixture");
  }
}

void check_scalar(const MixtureParams& params, const char* op) {
  if (params.mus.cols() != 1) {
    throw std::invalid_argument(std::string(op) +
                                " requires a scalar-target mixture");
  }
}

// log of the spherical Gaussian kernel, component i.
double log_kernel(const MixtureParams& params, int i,
                  const Eigen::VectorXd& t) {
  const auto c = static_cast<double>(params.mus.cols());
  const double sigma = params.sigmas[i];
  const double sq = (t.transpose() - params.mus.row(i)).squaredNorm();
  return -c * kHalfLog2Pi - c * std::log(sigma) - sq / (2.0 * sigma * sigma);
}

// Per-component log(alpha_i * phi_i(t)).
Eigen::VectorXd log_terms(const MixtureParams& params,
                          const Eigen::VectorXd& t) {
  const int m = params.components();
  Eigen::VectorXd out(m);
  for (int i = 0; i < m; ++i) {
    const double la = params.alphas[i] > 0.0
                          ? std::log(params.alphas[i])
                          : -std::numeric_limits<double>::infinity();
    out[i] = la + log_kernel(params, i, t);
  }
  return out;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double hi = v.maxCoeff();
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i) acc += std::exp(v[i] - hi);
  return hi + std::log(acc);
}

}  // namespace

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double log_density(const MixtureParams& params, const Eigen::VectorXd& t) {
  check_target(params, t);
  return log_sum_exp(log_terms(params, t));
}

double log_density(const MixtureParams& params, double t) {
  return log_density(params, Eigen::VectorXd::Constant(1, t));
}

double density(const MixtureParams& params, const Eigen::VectorXd& t) {
  return std::exp(log_density(params, t));
}

double density(const MixtureParams& params, double t) {
  return std::exp(log_density(params, t));
}

double nll(const MixtureParams& params, const Eigen::VectorXd& t) {
  return -log_density(params, t);
}

double nll(const MixtureParams& params, double t) {
  return -log_density(params, t);
}

double nll_sum(const std::vector<MixtureParams>& params,
               const Eigen::MatrixXd& targets) {
  if (static_cast<Eigen::Index>(params.size()) != targets.rows()) {
    throw std::invalid_argument("nll_sum: row count mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    acc += nll(params[i], Eigen::VectorXd(targets.row(i)));
  }
  return acc;
}

Eigen::VectorXd posterior(const MixtureParams& params,
                          const Eigen::VectorXd& t) {
  check_target(params, t);
  const Eigen::VectorXd terms = log_terms(params, t);
  const double lse = log_sum_exp(terms);
  Eigen::VectorXd pi(terms.size());
  for (int i = 0; i < terms.size(); ++i) pi[i] = std::exp(terms[i] - lse);
  return pi;
}

MixtureMoments mixture_stats(const MixtureParams& params) {
  check_scalar(params, "mixture_stats");
  const Eigen::VectorXd mu = params.mus.col(0);
  const double mean = params.alphas.dot(mu);
  double second = 0.0;
  for (int i = 0; i < params.components(); ++i) {
    second += params.alphas[i] *
              (params.sigmas[i] * params.sigmas[i] + mu[i] * mu[i]);
  }
  return {mean, std::max(0.0, second - mean * mean)};
}

double mixture_cdf(const MixtureParams& params, double x) {
  check_scalar(params, "mixture_cdf");
  double acc = 0.0;
  for (int i = 0; i < params.components(); ++i) {
    acc += params.alphas[i] *
           normal_cdf((x - params.mus(i, 0)) / params.sigmas[i]);
  }
  return acc;
}

std::pair<double, double> support_bracket(const MixtureParams& params,
                                          double spread) {
  const double pad = spread * params.sigmas.maxCoeff();
  return {params.mus.minCoeff() - pad, params.mus.maxCoeff() + pad};
}

double mixture_median(const MixtureParams& params, double tol) {
  check_scalar(params, "mixture_median");
  auto [lo, hi] = support_bracket(params);
  // The bracket pins cdf(lo) < 0.5 < cdf(hi); keep halving until the
  // interval collapses to floating-point resolution (never wider than tol).
  const double floor_width =
      std::max(tol * 1e-6, 4.0 * std::numeric_limits<double>::epsilon() *
                               std::max(1.0, std::max(std::abs(lo), std::abs(hi))));
  for (int it = 0; it < 200 && hi - lo > floor_width; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mixture_cdf(params, mid) < 0.5) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> sample(const MixtureParams& params, Rng& rng, int n) {
  check_scalar(params, "sample");
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  std::vector<double> draws;
  draws.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform01();
    double cum = 0.0;
    int comp = params.components() - 1;
    for (int i = 0; i < params.components(); ++i) {
      cum += params.alphas[i];
      if (u < cum) {
        comp = i;
        break;
      }
    }
    draws.push_back(rng.normal(params.mus(comp, 0), params.sigmas[comp]));
  }
  return draws;
}

PdfGrid pdf_grid(const MixtureParams& params, int points) {
  check_scalar(params, "pdf_grid");
  if (points < 2) throw std::invalid_argument("pdf_grid: points must be >= 2");
  auto [lo, hi] = support_bracket(params);
  PdfGrid grid;
  grid.t.resize(points);
  grid.density.resize(points);
  grid.cdf.resize(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) {
    const double x = lo + step * i;
    grid.t[i] = x;
    grid.density[i] = density(params, x);
    grid.cdf[i] = mixture_cdf(params, x);
  }
  return grid;
}

}  // namespace cqre::mdn
