#include "cqre/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "cqre/integrate.hpp"

namespace cqre::metrics {
namespace {

void check_scalar_mixture(const mdn::MixtureParams& params) {
  if (params.target_dim() != 1)
    throw std::invalid_argument("metrics: scalar-target mixture required");
}

void check_sizes(const std::vector<mdn::MixtureParams>& preds,
                 const Eigen::VectorXd& targets) {
  if (preds.empty())
    throw std::invalid_argument("metrics: empty prediction set");
  if (static_cast<int>(preds.size()) != targets.size())
    throw std::invalid_argument(
        "metrics: prediction and target counts differ");
}

// E|X| for X ~ N(m, s^2).
double abs_moment(double m, double s) {
  if (s <= 0.0) return std::abs(m);
  const double z = m / s;
  return m * (2.0 * mdn::normal_cdf(z) - 1.0) + 2.0 * s * mdn::normal_pdf(z);
}

}  // namespace

double crps_sample(const mdn::MixtureParams& params, double t) {
  check_scalar_mixture(params);
  const int m = params.components();
  double first = 0.0;
  for (int i = 0; i < m; ++i)
    first += params.alphas(i) * abs_moment(t - params.mus(i, 0),
                                           params.sigmas(i));
  double second = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double s = std::sqrt(params.sigmas(i) * params.sigmas(i) +
                                 params.sigmas(j) * params.sigmas(j));
      second += params.alphas(i) * params.alphas(j) *
                abs_moment(params.mus(i, 0) - params.mus(j, 0), s);
    }
  }
  return first - 0.5 * second;
}

double crps_quadrature(const mdn::MixtureParams& params, double t,
                       double tol) {
  check_scalar_mixture(params);
  auto [lo, hi] = mdn::support_bracket(params);
  if (t < lo) lo = t - 1.0;
  if (t > hi) hi = t + 1.0;

  auto below = [&](double y) {
    const double f = mdn::mixture_cdf(params, y);
    return f * f;
  };
  auto above = [&](double y) {
    const double f = mdn::mixture_cdf(params, y) - 1.0;
    return f * f;
  };
  double total = 0.0;
  if (t > lo) total += integrate(below, lo, t, tol);
  if (hi > t) total += integrate(above, t, hi, tol);
  return total;
}

double crps_mean(const std::vector<mdn::MixtureParams>& preds,
                 const Eigen::VectorXd& targets) {
  check_sizes(preds, targets);
  double sum = 0.0;
  for (int i = 0; i < targets.size(); ++i)
    sum += crps_sample(preds[static_cast<std::size_t>(i)], targets(i));
  return sum / static_cast<double>(targets.size());
}

double nlpd_mean(const std::vector<mdn::MixtureParams>& preds,
                 const Eigen::VectorXd& targets) {
  check_sizes(preds, targets);
  double sum = 0.0;
  for (int i = 0; i < targets.size(); ++i) {
    Eigen::VectorXd t(1);
    t(0) = targets(i);
    sum -= mdn::log_density(preds[static_cast<std::size_t>(i)], t);
  }
  return sum / static_cast<double>(targets.size());
}

double mse_median(const std::vector<mdn::MixtureParams>& preds,
                  const Eigen::VectorXd& targets) {
  check_sizes(preds, targets);
  double sum = 0.0;
  for (int i = 0; i < targets.size(); ++i) {
    const double med = mdn::mixture_median(preds[static_cast<std::size_t>(i)]);
    const double err = med - targets(i);
    sum += err * err;
  }
  return sum / static_cast<double>(targets.size());
}

ScoreReport score_all(const std::vector<mdn::MixtureParams>& preds,
                      const Eigen::VectorXd& targets) {
  ScoreReport report;
  report.crps = crps_mean(preds, targets);
  report.nlpd = nlpd_mean(preds, targets);
  report.mse = mse_median(preds, targets);
  report.rows = static_cast<int>(targets.size());
  return report;
}

std::string render_table(const ScoreReport& report) {
  char buf[160];
  int n = std::snprintf(buf, sizeof(buf),
                        "metric        value\n"
                        "crps       %12.6f\n"
                        "nlpd       %12.6f\n"
                        "mse_median %12.6f\n"
                        "rows       %12d\n",
                        report.crps, report.nlpd, report.mse, report.rows);
  if (n < 0 || n >= static_cast<int>(sizeof(buf)))
    throw std::runtime_error("render_table: format failure");
  return std::string(buf, static_cast<std::size_t>(n));
}

void save_report(const ScoreReport& report, const std::string& path) {
  nlohmann::json j;
  j["crps"] = report.crps;
  j["nlpd"] = report.nlpd;
  j["mse_median"] = report.mse;
  j["rows"] = report.rows;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace cqre::metrics
