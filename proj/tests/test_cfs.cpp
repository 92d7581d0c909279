#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "cqre/cfs.hpp"
#include "cqre/rng.hpp"

using namespace cqre;
using query::cfs_merit;
using query::cfs_select;
using query::FeatureSelection;

namespace {

// Plain-loop Pearson correlations, kept separate from the library's
// vectorized version so the brute-force comparison does not share code.
void correlations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  Eigen::MatrixXd& corr_ff, Eigen::VectorXd& corr_cf) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  auto pearson = [n](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < n; ++i) {
      ma += a(i);
      mb += b(i);
    }
    ma /= n;
    mb /= n;
    double num = 0.0, da = 0.0, db = 0.0;
    for (int i = 0; i < n; ++i) {
      num += (a(i) - ma) * (b(i) - mb);
      da += (a(i) - ma) * (a(i) - ma);
      db += (b(i) - mb) * (b(i) - mb);
    }
    return std::abs(num / std::sqrt(da * db));
  };
  corr_cf.resize(p);
  corr_ff = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) corr_cf(j) = pearson(X.col(j), y);
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      corr_ff(a, b) = corr_ff(b, a) = pearson(X.col(a), X.col(b));
}

double exhaustive_best(const Eigen::MatrixXd& corr_ff,
                       const Eigen::VectorXd& corr_cf, int p) {
  double best = 0.0;
  for (unsigned mask = 1; mask < (1u << p); ++mask) {
    std::vector<int> subset;
    for (int j = 0; j < p; ++j)
      if (mask & (1u << j)) subset.push_back(j);
    best = std::max(best, cfs_merit(corr_ff, corr_cf, subset));
  }
  return best;
}

}  // namespace

TEST_CASE("merit of a single feature is its target correlation") {
  Eigen::MatrixXd ff = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd cf(3);
  cf << 0.25, 0.5, 0.75;
  CHECK(cfs_merit(ff, cf, {0}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(cfs_merit(ff, cf, {2}) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(cfs_merit(ff, cf, {}) == 0.0);
}

TEST_CASE("merit of two uncorrelated 0.8 features is 1.6/sqrt(2)") {
  Eigen::MatrixXd ff = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd cf(2);
  cf << 0.8, 0.8;
  // 2 * 0.8 / sqrt(2), frozen from a high-precision evaluation.
  CHECK(cfs_merit(ff, cf, {0, 1}) ==
        doctest::Approx(1.131370849898476).epsilon(1e-15));
}

TEST_CASE("a fully redundant pair is worth no more than one feature") {
  Eigen::MatrixXd ff(2, 2);
  ff << 0.0, 1.0, 1.0, 0.0;
  Eigen::VectorXd cf(2);
  cf << 0.8, 0.8;
  CHECK(cfs_merit(ff, cf, {0, 1}) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("a dominant feature is selected alone") {
  const int n = 500;
  const int p = 10;
  Rng rng(11);
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
    y(i) = X(i, 0) + 0.05 * rng.normal();
  }

  FeatureSelection sel = cfs_select(X, y);
  REQUIRE(sel.selected == std::vector<int>{0});
  CHECK(sel.excluded.empty());

  Eigen::MatrixXd corr_ff;
  Eigen::VectorXd corr_cf;
  correlations(X, y, corr_ff, corr_cf);
  CHECK(sel.merit == doctest::Approx(corr_cf(0)).epsilon(1e-12));
  // With one dominant feature the search result matches the global optimum
  // over all 2^10 subsets.
  CHECK(sel.merit ==
        doctest::Approx(exhaustive_best(corr_ff, corr_cf, p)).epsilon(1e-12));
}

TEST_CASE("search result is bounded by singles below and exhaustive above") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const int n = 150;
    const int p = 9;
    Rng rng(seed);
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
      // Correlated target with overlapping contributions so 2- and
      // 3-subsets compete.
      y(i) = 0.7 * X(i, 0) + 0.5 * X(i, 1) + 0.3 * X(i, 2) + rng.normal();
    }
    FeatureSelection sel = cfs_select(X, y);

    Eigen::MatrixXd corr_ff;
    Eigen::VectorXd corr_cf;
    correlations(X, y, corr_ff, corr_cf);
    double best_single = 0.0;
    for (int j = 0; j < p; ++j) best_single = std::max(best_single, corr_cf(j));

    CHECK(sel.merit >= best_single - 1e-12);
    CHECK(sel.merit <= exhaustive_best(corr_ff, corr_cf, p) + 1e-12);
    CHECK(std::is_sorted(sel.selected.begin(), sel.selected.end()));
    CHECK(std::adjacent_find(sel.selected.begin(), sel.selected.end()) ==
          sel.selected.end());
  }
}

TEST_CASE("the search log starts at the empty set and never repeats") {
  Rng rng(7);
  Eigen::MatrixXd X(60, 4);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < 4; ++j) X(i, j) = rng.normal();
    y(i) = X(i, 1) + 0.2 * rng.normal();
  }
  FeatureSelection sel = cfs_select(X, y);
  REQUIRE(!sel.search_log.empty());
  CHECK(sel.search_log[0].first.empty());
  CHECK(sel.search_log[0].second == 0.0);
  std::set<std::vector<int>> seen;
  for (const auto& [subset, merit] : sel.search_log) {
    CHECK(seen.insert(subset).second);
    CHECK(std::isfinite(merit));
  }
  // The winning subset must have been logged with the winning merit.
  bool found = false;
  for (const auto& [subset, merit] : sel.search_log)
    if (subset == sel.selected && merit == sel.merit) found = true;
  CHECK(found);
}

TEST_CASE("selection is deterministic") {
  Rng rng(19);
  Eigen::MatrixXd X(80, 6);
  Eigen::VectorXd y(80);
  for (int i = 0; i < 80; ++i) {
    for (int j = 0; j < 6; ++j) X(i, j) = rng.normal();
    y(i) = X(i, 3) - X(i, 5) + 0.5 * rng.normal();
  }
  FeatureSelection a = cfs_select(X, y);
  FeatureSelection b = cfs_select(X, y);
  CHECK(a.selected == b.selected);
  CHECK(a.merit == b.merit);
  CHECK(a.search_log == b.search_log);
}

TEST_CASE("zero-variance features are excluded, not selected") {
  Rng rng(3);
  Eigen::MatrixXd X(50, 4);
  Eigen::VectorXd y(50);
  for (int i = 0; i < 50; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = rng.normal();
    X(i, 2) = 7.5;  // constant
    X(i, 3) = rng.normal();
    y(i) = X(i, 0) + 0.1 * rng.normal();
  }
  FeatureSelection sel = cfs_select(X, y, /*warn=*/false);
  CHECK(sel.excluded == std::vector<int>{2});
  CHECK(std::find(sel.selected.begin(), sel.selected.end(), 2) ==
        sel.selected.end());
  for (const auto& [subset, merit] : sel.search_log)
    CHECK(std::find(subset.begin(), subset.end(), 2) == subset.end());
}

TEST_CASE("degenerate inputs are rejected") {
  Eigen::MatrixXd one_col = Eigen::MatrixXd::Random(10, 1);
  Eigen::VectorXd y10 = Eigen::VectorXd::Random(10);
  CHECK_THROWS_AS((void)cfs_select(one_col, y10), std::invalid_argument);

  Eigen::MatrixXd two_rows = Eigen::MatrixXd::Random(2, 3);
  Eigen::VectorXd y2 = Eigen::VectorXd::Random(2);
  CHECK_THROWS_AS((void)cfs_select(two_rows, y2), std::invalid_argument);

  Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 3);
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(10, 4.0);
  CHECK_THROWS_AS((void)cfs_select(X, flat), std::invalid_argument);

  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(10, 3, 1.0);
  CHECK_THROWS_AS((void)cfs_select(constant, y10, /*warn=*/false),
                  std::invalid_argument);

  Eigen::VectorXd wrong_len = Eigen::VectorXd::Random(9);
  CHECK_THROWS_AS((void)cfs_select(X, wrong_len), std::invalid_argument);
}
