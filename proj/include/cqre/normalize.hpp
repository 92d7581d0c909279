#pragma once

#include <Eigen/Dense>

namespace cqre::data {

// Per-column z-score transform fitted on training data. Every retained
// column must have positive spread; constant columns are filtered out by
// fit_normalizers before this is constructed.
struct ZScore {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // sample standard deviation (n-1 denominator)

  Eigen::VectorXd apply(const Eigen::VectorXd& row) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& row) const;
};

// Affine map from the observed training range [in_min, in_max] onto
// [out_lo, out_hi]. Values outside the training range map outside the
// output band un-clamped and invert exactly.
struct MinMax {
  double in_min = 0.0;
  double in_max = 1.0;
  double out_lo = 0.1;
  double out_hi = 0.9;

  double apply(double v) const;
  double invert(double v) const;
  double scale() const { return (in_max - in_min) / (out_hi - out_lo); }
};

}  // namespace cqre::data
