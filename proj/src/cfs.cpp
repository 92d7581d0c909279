#include "cqre/cfs.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <stdexcept>

namespace cqre::query {
namespace {

constexpr int kStallLimit = 5;

struct Node {
  std::vector<int> subset;
  double merit = 0.0;
  bool expanded = false;
};

}  // namespace

double cfs_merit(const Eigen::MatrixXd& corr_ff, const Eigen::VectorXd& corr_cf,
                 const std::vector<int>& subset) {
  const int k = static_cast<int>(subset.size());
  if (k == 0) return 0.0;
  double sum_cf = 0.0;
  for (int f : subset) sum_cf += corr_cf(f);
  double sum_ff = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      sum_ff += corr_ff(subset[static_cast<std::size_t>(a)],
                        subset[static_cast<std::size_t>(b)]);
  return sum_cf / std::sqrt(static_cast<double>(k) + 2.0 * sum_ff);
}

FeatureSelection cfs_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            bool warn) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (p < 2) throw std::invalid_argument("cfs_select: need >= 2 features");
  if (n < 3) throw std::invalid_argument("cfs_select: need >= 3 samples");
  if (y.size() != n)
    throw std::invalid_argument("cfs_select: target length mismatch");

  Eigen::VectorXd y_c = y.array() - y.mean();
  const double y_ss = y_c.squaredNorm();
  if (y_ss <= 0.0)
    throw std::invalid_argument("cfs_select: target has zero variance");

  Eigen::MatrixXd X_c = X.rowwise() - X.colwise().mean();
  Eigen::VectorXd col_ss(p);
  FeatureSelection out;
  std::vector<int> candidates;
  for (int j = 0; j < p; ++j) {
    col_ss(j) = X_c.col(j).squaredNorm();
    if (col_ss(j) > 0.0) {
      candidates.push_back(j);
    } else {
      out.excluded.push_back(j);
    }
  }
  if (warn && !out.excluded.empty()) {
    std::cerr << "warning: zero-variance feature column(s) excluded from"
                 " selection:";
    for (int j : out.excluded) std::cerr << ' ' << j;
    std::cerr << '\n';
  }
  if (candidates.empty())
    throw std::invalid_argument("cfs_select: every feature is constant");

  Eigen::VectorXd corr_cf = Eigen::VectorXd::Zero(p);
  for (int j : candidates)
    corr_cf(j) =
        std::abs(X_c.col(j).dot(y_c) / std::sqrt(col_ss(j) * y_ss));
  Eigen::MatrixXd corr_ff = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    for (std::size_t b = a + 1; b < candidates.size(); ++b) {
      const int i = candidates[a];
      const int j = candidates[b];
      const double r = std::abs(X_c.col(i).dot(X_c.col(j)) /
                                std::sqrt(col_ss(i) * col_ss(j)));
      corr_ff(i, j) = r;
      corr_ff(j, i) = r;
    }
  }

  std::vector<Node> nodes;
  std::set<std::vector<int>> visited;
  nodes.push_back(Node{{}, 0.0, false});
  visited.insert({});
  out.search_log.emplace_back(std::vector<int>{}, 0.0);

  std::vector<int> best_subset;
  double best_merit = 0.0;
  int stall = 0;

  while (stall < kStallLimit) {
    int pick = -1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].expanded) continue;
      if (pick < 0 || nodes[i].merit > nodes[static_cast<std::size_t>(
                                            pick)].merit)
        pick = static_cast<int>(i);
    }
    if (pick < 0) break;
    Node node = nodes[static_cast<std::size_t>(pick)];
    nodes[static_cast<std::size_t>(pick)].expanded = true;

    bool improved = false;
    for (int f : candidates) {
      if (std::binary_search(node.subset.begin(), node.subset.end(), f))
        continue;
      std::vector<int> child = node.subset;
      child.insert(std::upper_bound(child.begin(), child.end(), f), f);
      if (!visited.insert(child).second) continue;
      const double merit = cfs_merit(corr_ff, corr_cf, child);
      out.search_log.emplace_back(child, merit);
      nodes.push_back(Node{child, merit, false});
      if (merit > best_merit) {
        best_merit = merit;
        best_subset = std::move(child);
        improved = true;
      }
    }
    stall = improved ? 0 : stall + 1;
  }

  out.selected = std::move(best_subset);
  out.merit = best_merit;
  return out;
}

}  // namespace cqre::query
