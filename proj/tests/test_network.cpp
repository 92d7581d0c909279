#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cqre/network.hpp"
#include "cqre/rng.hpp"

using namespace cqre;
using mdn::MdnConfig;
using mdn::NetworkWeights;

namespace {

MdnConfig random_config(Rng& rng) {
  MdnConfig c;
  c.n_inputs = 1 + static_cast<int>(rng.index(6));
  c.n_hidden = 1 + static_cast<int>(rng.index(8));
  c.n_mixtures = 1 + static_cast<int>(rng.index(3));
  c.target_dim = 1 + static_cast<int>(rng.index(2));
  c.seed = static_cast<std::uint64_t>(rng.index(1u << 20));
  return c;
}

NetworkWeights random_weights(const MdnConfig& c, Rng& rng) {
  NetworkWeights w = mdn::init_weights(c);
  for (int i = 0; i < w.output_b.size(); ++i)
    w.output_b(i) = rng.uniform(-0.3, 0.3);
  for (int i = 0; i < w.hidden_b.size(); ++i)
    w.hidden_b(i) = rng.uniform(-0.3, 0.3);
  return w;
}

double sample_nll(const NetworkWeights& w, const MdnConfig& c,
                  const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
  const Eigen::VectorXd z = mdn::mlp_forward(w, x);
  return mdn::nll(mdn::activate(z, c.n_mixtures, c.target_dim), t);
}

// Central finite difference of the per-sample NLL along one flat index.
double fd_gradient(const NetworkWeights& w, const MdnConfig& c,
                   const Eigen::VectorXd& x, const Eigen::VectorXd& t,
                   Eigen::Index k, double h) {
  Eigen::VectorXd flat = w.flatten();
  flat(k) += h;
  const double up = sample_nll(NetworkWeights::unflatten(flat, c), c, x, t);
  flat(k) -= 2.0 * h;
  const double down = sample_nll(NetworkWeights::unflatten(flat, c), c, x, t);
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST_CASE("activate produces a simplex, positive sigmas, pass-through mus") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 1 + static_cast<int>(rng.index(4));
    const int c = 1 + static_cast<int>(rng.index(2));
    Eigen::VectorXd z((2 + c) * m);
    for (int i = 0; i < z.size(); ++i) z(i) = rng.uniform(-30.0, 30.0);
    mdn::MixtureParams p = mdn::activate(z, m, c);
    CHECK(p.alphas.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.alphas.minCoeff() >= 0.0);
    CHECK(p.sigmas.minCoeff() > 0.0);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < c; ++k)
        CHECK(p.mus(i, k) == z(2 * m + i * c + k));
  }
}

TEST_CASE("activate is invariant to a constant shift of the mixing logits") {
  Eigen::VectorXd z(9);
  z << 1.0, -2.0, 0.5, 0.1, 0.2, 0.3, -1.0, 0.0, 1.0;
  mdn::MixtureParams a = mdn::activate(z, 3, 1);
  Eigen::VectorXd shifted = z;
  shifted.head(3).array() += 500.0;
  mdn::MixtureParams b = mdn::activate(shifted, 3, 1);
  for (int i = 0; i < 3; ++i)
    CHECK(a.alphas(i) == doctest::Approx(b.alphas(i)).epsilon(1e-12));
}

TEST_CASE("huge logits do not overflow the softmax") {
  Eigen::VectorXd z(6);
  z << 1000.0, 999.0, 0.0, 0.0, 0.1, 0.2;
  mdn::MixtureParams p = mdn::activate(z, 2, 1);
  CHECK(std::isfinite(p.alphas(0)));
  CHECK(p.alphas.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log sigma outputs are clamped into a representable range") {
  Eigen::VectorXd z(6);
  z << 0.0, 0.0, 300.0, -300.0, 0.0, 0.0;
  mdn::MixtureParams p = mdn::activate(z, 2, 1);
  CHECK(p.sigmas(0) == doctest::Approx(std::exp(20.0)).epsilon(1e-12));
  CHECK(p.sigmas(1) == doctest::Approx(std::exp(-20.0)).epsilon(1e-12));
}

TEST_CASE("init weights are deterministic, in range, with zero biases") {
  MdnConfig c;
  c.n_inputs = 4;
  c.n_hidden = 7;
  c.n_mixtures = 3;
  c.seed = 42;
  NetworkWeights a = mdn::init_weights(c);
  NetworkWeights b = mdn::init_weights(c);
  CHECK(a.hidden_w == b.hidden_w);
  CHECK(a.output_w == b.output_w);
  CHECK(a.hidden_b.cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.output_b.cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.hidden_w.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(4.0));
  CHECK(a.output_w.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(7.0));
}

TEST_CASE("initial sigmas sit near one at the origin") {
  MdnConfig c;
  c.n_inputs = 3;
  c.n_hidden = 15;
  c.n_mixtures = 3;
  c.seed = 7;
  NetworkWeights w = mdn::init_weights(c);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  mdn::MixtureParams p =
      mdn::activate(mdn::mlp_forward(w, x), c.n_mixtures, c.target_dim);
  for (int i = 0; i < 3; ++i)
    CHECK(p.sigmas(i) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("flatten and unflatten round-trip") {
  Rng rng(8);
  MdnConfig c = random_config(rng);
  NetworkWeights w = random_weights(c, rng);
  Eigen::VectorXd flat = w.flatten();
  REQUIRE(flat.size() == w.parameter_count());
  NetworkWeights back = NetworkWeights::unflatten(flat, c);
  CHECK(back.hidden_w == w.hidden_w);
  CHECK(back.hidden_b == w.hidden_b);
  CHECK(back.output_w == w.output_w);
  CHECK(back.output_b == w.output_b);
}

TEST_CASE("output gradients match finite differences through activate") {
  Rng rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    const int m = 1 + static_cast<int>(rng.index(3));
    const int cdim = 1 + static_cast<int>(rng.index(2));
    Eigen::VectorXd z((2 + cdim) * m);
    for (int i = 0; i < z.size(); ++i) z(i) = rng.uniform(-1.5, 1.5);
    Eigen::VectorXd t(cdim);
    for (int k = 0; k < cdim; ++k) t(k) = rng.uniform(-1.0, 1.0);

    mdn::MixtureParams p = mdn::activate(z, m, cdim);
    Eigen::VectorXd analytic = mdn::output_gradients(p, t);

    const double h = 1e-6;
    for (int k = 0; k < z.size(); ++k) {
      Eigen::VectorXd zp = z, zm = z;
      zp(k) += h;
      zm(k) -= h;
      const double fd = (mdn::nll(mdn::activate(zp, m, cdim), t) -
                         mdn::nll(mdn::activate(zm, m, cdim), t)) /
                        (2.0 * h);
      CHECK(analytic(k) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("backprop matches central finite differences") {
  Rng rng(31);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    MdnConfig c = random_config(rng);
    NetworkWeights w = random_weights(c, rng);
    Eigen::VectorXd x(c.n_inputs), t(c.target_dim);
    for (int i = 0; i < x.size(); ++i) x(i) = rng.uniform(-2.0, 2.0);
    for (int k = 0; k < t.size(); ++k) t(k) = rng.uniform(-1.0, 1.0);

    const Eigen::VectorXd analytic = mdn::backprop(w, x, t).flatten();
    for (Eigen::Index k = 0; k < analytic.size(); ++k) {
      const double fd = fd_gradient(w, c, x, t, k, 1e-6);
      // Relative for components of meaningful size, absolute below 1;
      // central differences bottom out near 1e-10 on tiny components.
      const double rel =
          std::abs(analytic(k) - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("batch gradient equals the sum of per-sample gradients") {
  Rng rng(41);
  MdnConfig c = random_config(rng);
  NetworkWeights w = random_weights(c, rng);
  const int n = 7;
  Eigen::MatrixXd X(n, c.n_inputs), T(n, c.target_dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < c.n_inputs; ++j) X(i, j) = rng.uniform(-2.0, 2.0);
    for (int k = 0; k < c.target_dim; ++k) T(i, k) = rng.uniform(-1.0, 1.0);
  }
  NetworkWeights grad = NetworkWeights::zeros(c);
  const double total = mdn::nll_and_gradient(w, X, T, &grad);

  double expected = 0.0;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(w.parameter_count());
  for (int i = 0; i < n; ++i) {
    expected += sample_nll(w, c, X.row(i).transpose(), T.row(i).transpose());
    acc += mdn::backprop(w, X.row(i).transpose(), T.row(i).transpose())
               .flatten();
  }
  CHECK(total == doctest::Approx(expected).epsilon(1e-12));
  CHECK((grad.flatten() - acc).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("config validation rejects bad dimensions") {
  MdnConfig c;
  c.n_mixtures = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = MdnConfig{};
  c.n_inputs = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = MdnConfig{};
  c.target_dim = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
