#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cqre::query {

struct FeatureSelection {
  std::vector<int> selected;  // ascending feature indices
  double merit = 0.0;
  // Every subset evaluated during the search, in visit order.
  std::vector<std::pair<std::vector<int>, double>> search_log;
  std::vector<int> excluded;  // zero-variance features, not candidates
};

// Merit of one subset under correlation-based feature selection:
//   k * mean|r_cf| / sqrt(k + k (k-1) * mean|r_ff|)
// from the feature-target and feature-feature Pearson correlations.
double cfs_merit(const Eigen::MatrixXd& corr_ff, const Eigen::VectorXd& corr_cf,
                 const std::vector<int>& subset);

// Best-first search over subsets grown by single-feature additions,
// stopping after five consecutive expansions that fail to improve the best
// merit seen.
FeatureSelection cfs_select(const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y, bool warn = true);

}  // namespace cqre::query
