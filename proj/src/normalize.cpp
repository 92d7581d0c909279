#include "cqre/normalize.hpp"

#include <stdexcept>

namespace cqre::data {

Eigen::VectorXd ZScore::apply(const Eigen::VectorXd& row) const {
  if (row.size() != mean.size())
    throw std::invalid_argument("ZScore::apply: row width mismatch");
  return (row - mean).cwiseQuotient(stddev);
}

Eigen::MatrixXd ZScore::apply(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != mean.size())
    throw std::invalid_argument("ZScore::apply: column count mismatch");
  Eigen::MatrixXd out = rows;
  out.rowwise() -= mean.transpose();
  out.array().rowwise() /= stddev.transpose().array();
  return out;
}

Eigen::VectorXd ZScore::invert(const Eigen::VectorXd& row) const {
  if (row.size() != mean.size())
    throw std::invalid_argument("ZScore::invert: row width mismatch");
  return row.cwiseProduct(stddev) + mean;
}

double MinMax::apply(double v) const {
  return out_lo + (v - in_min) * (out_hi - out_lo) / (in_max - in_min);
}

double MinMax::invert(double v) const {
  return in_min + (v - out_lo) * (in_max - in_min) / (out_hi - out_lo);
}

}  // namespace cqre::data
