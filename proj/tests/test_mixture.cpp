#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cqre/integrate.hpp"
#include "cqre/mixture.hpp"
#include "cqre/rng.hpp"

using namespace cqre;
using mdn::MixtureParams;

namespace {

MixtureParams make_mixture(std::initializer_list<double> alphas,
                           std::initializer_list<double> mus,
                           std::initializer_list<double> sigmas) {
  MixtureParams p;
  const int m = static_cast<int>(alphas.size());
  p.alphas.resize(m);
  p.mus.resize(m, 1);
  p.sigmas.resize(m);
  int i = 0;
  for (double a : alphas) p.alphas(i++) = a;
  i = 0;
  for (double mu : mus) p.mus(i++, 0) = mu;
  i = 0;
  for (double s : sigmas) p.sigmas(i++) = s;
  return p;
}

MixtureParams random_mixture(Rng& rng, int max_components = 5) {
  const int m = 1 + static_cast<int>(rng.index(max_components));
  MixtureParams p;
  p.alphas.resize(m);
  p.mus.resize(m, 1);
  p.sigmas.resize(m);
  for (int i = 0; i < m; ++i) {
    p.alphas(i) = rng.uniform(0.05, 1.0);
    p.mus(i, 0) = rng.uniform(-3.0, 3.0);
    p.sigmas(i) = rng.uniform(0.05, 2.0);
  }
  p.alphas /= p.alphas.sum();
  return p;
}

}  // namespace

TEST_CASE("standard normal density at the mode") {
  MixtureParams p = make_mixture({1.0}, {0.0}, {1.0});
  CHECK(mdn::density(p, 0.0) == doctest::Approx(0.39894228040143267)
                                    .epsilon(1e-14));
}

TEST_CASE("two-component density and nll at a frozen point") {
  MixtureParams p = make_mixture({0.5, 0.5}, {-1.0, 1.0}, {1.0, 1.0});
  CHECK(mdn::density(p, 0.0) == doctest::Approx(0.24197072451914335)
                                    .epsilon(1e-14));
  CHECK(mdn::nll(p, 0.0) == doctest::Approx(1.4189385332046727)
                                .epsilon(1e-14));
}

TEST_CASE("log density survives far-out targets where density underflows") {
  MixtureParams p = make_mixture({1.0}, {0.0}, {0.1});
  Eigen::VectorXd t(1);
  t(0) = 40.0;
  CHECK(mdn::density(p, t) == 0.0);
  const double expected = -std::log(0.1) - 0.5 * std::log(2.0 * M_PI) -
                          (40.0 * 40.0) / (2.0 * 0.01);
  CHECK(mdn::log_density(p, t) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::isfinite(mdn::log_density(p, t)));
}

TEST_CASE("posterior responsibilities at a frozen point") {
  MixtureParams p = make_mixture({0.5, 0.5}, {0.0, 2.0}, {0.5, 0.5});
  Eigen::VectorXd t(1);
  t(0) = 2.0;
  Eigen::VectorXd pi = mdn::posterior(p, t);
  CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pi(0) == doctest::Approx(3.353501304664781e-4).epsilon(1e-12));
  CHECK(pi(1) == doctest::Approx(0.99966464986953352).epsilon(1e-12));
}

TEST_CASE("posterior is uniform when components coincide") {
  MixtureParams p = make_mixture({0.25, 0.25, 0.25, 0.25},
                                 {1.0, 1.0, 1.0, 1.0},
                                 {0.3, 0.3, 0.3, 0.3});
  Eigen::VectorXd t(1);
  t(0) = 0.7;
  Eigen::VectorXd pi = mdn::posterior(p, t);
  for (int i = 0; i < 4; ++i)
    CHECK(pi(i) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("density integrates to one over the 12-sigma bracket") {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    MixtureParams p = random_mixture(rng);
    auto [lo, hi] = mdn::support_bracket(p);
    const double total = integrate(
        [&](double x) { return mdn::density(p, x); }, lo, hi, 1e-10);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("nll_sum equals the sum of per-sample nll") {
  Rng rng(12);
  std::vector<MixtureParams> all;
  Eigen::MatrixXd targets(20, 1);
  double expected = 0.0;
  for (int i = 0; i < 20; ++i) {
    all.push_back(random_mixture(rng));
    targets(i, 0) = rng.uniform(-2.0, 2.0);
    expected += mdn::nll(all.back(), targets(i, 0));
  }
  CHECK(mdn::nll_sum(all, targets) == doctest::Approx(expected)
                                          .epsilon(1e-14));
}

TEST_CASE("mixture stats on a frozen two-component case") {
  MixtureParams p = make_mixture({0.5, 0.5}, {0.0, 2.0}, {1.0, 1.0});
  mdn::MixtureMoments m = mdn::mixture_stats(p);
  CHECK(m.mean == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.variance == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("mixture cdf and median against an independent oracle") {
  MixtureParams p = make_mixture({0.3, 0.7}, {-1.0, 2.0}, {0.5, 1.5});
  CHECK(mdn::mixture_cdf(p, 0.4) == doctest::Approx(0.39937629543772796)
                                        .epsilon(1e-12));
  const double med = mdn::mixture_median(p);
  CHECK(med == doctest::Approx(1.1510927598840408).epsilon(1e-9));
  CHECK(mdn::mixture_cdf(p, med) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("median of a symmetric mixture is the symmetry point") {
  MixtureParams p = make_mixture({0.5, 0.5}, {-2.0, 2.0}, {0.4, 0.4});
  CHECK(mdn::mixture_median(p) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("cdf is monotone and spans (0, 1) across the bracket") {
  Rng rng(13);
  MixtureParams p = random_mixture(rng);
  auto [lo, hi] = mdn::support_bracket(p);
  double prev = mdn::mixture_cdf(p, lo);
  CHECK(prev < 1e-6);
  for (int i = 1; i <= 200; ++i) {
    const double x = lo + (hi - lo) * i / 200.0;
    const double c = mdn::mixture_cdf(p, x);
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(prev > 1.0 - 1e-6);
}

TEST_CASE("sampling matches the analytic moments") {
  MixtureParams p = make_mixture({0.6, 0.4}, {-1.0, 3.0}, {0.5, 1.0});
  Rng rng(99);
  const int n = 200000;
  std::vector<double> draws = mdn::sample(p, rng, n);
  double mean = 0.0;
  for (double d : draws) mean += d;
  mean /= n;
  double var = 0.0;
  for (double d : draws) var += (d - mean) * (d - mean);
  var /= n - 1;
  mdn::MixtureMoments m = mdn::mixture_stats(p);
  const double se_mean = std::sqrt(m.variance / n);
  CHECK(std::abs(mean - m.mean) < 4.0 * se_mean);
  CHECK(std::abs(var - m.variance) / m.variance < 0.02);
}

TEST_CASE("pdf grid integrates to one and ends near cdf one") {
  MixtureParams p = make_mixture({0.5, 0.5}, {0.2, 0.6}, {0.05, 0.08});
  mdn::PdfGrid grid = mdn::pdf_grid(p, 512);
  REQUIRE(grid.t.size() == 512);
  double integral = 0.0;
  for (int i = 1; i < grid.t.size(); ++i)
    integral += 0.5 * (grid.density(i) + grid.density(i - 1)) *
                (grid.t(i) - grid.t(i - 1));
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(grid.cdf(0) < 1e-6);
  CHECK(grid.cdf(511) > 1.0 - 1e-6);
  for (int i = 1; i < 512; ++i) CHECK(grid.cdf(i) >= grid.cdf(i - 1));
}

TEST_CASE("invalid targets are rejected") {
  MixtureParams p = make_mixture({1.0}, {0.0}, {1.0});
  Eigen::VectorXd wrong(2);
  wrong << 0.0, 1.0;
  CHECK_THROWS_AS((void)mdn::log_density(p, wrong), std::invalid_argument);
}

TEST_CASE("near-degenerate sigma keeps a finite, sharp density") {
  MixtureParams p = make_mixture({1.0}, {0.5}, {1e-9});
  CHECK(std::isfinite(mdn::log_density(p, 0.5)));
  CHECK(mdn::mixture_median(p) == doctest::Approx(0.5).epsilon(1e-9));
}
