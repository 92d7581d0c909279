#pragma once

#include <string>

#include <Eigen/Dense>

#include <vector>

#include "cqre/dataset.hpp"
#include "cqre/metrics.hpp"
#include "cqre/mixture.hpp"
#include "cqre/network.hpp"

namespace cqre::mdn {

// A fitted estimator: network weights plus the normalizers that were
// fitted on its training partition, bundled so prediction always applies
// the same input scaling the optimizer saw.
struct MdnModel {
  static constexpr int kFormatVersion = 1;

  MdnConfig config;
  NetworkWeights weights;
  data::Normalizers norm;
  data::Target target = data::Target::cpu;

  // Mixture over the normalized target band.
  MixtureParams predict_normalized(const Eigen::VectorXd& raw_features) const;
  // Mixture mapped back to raw resource fractions.
  MixtureParams predict_raw(const Eigen::VectorXd& raw_features) const;
};

// Affine image of a mixture under the inverse of a fitted min-max map.
// Only defined for scalar targets: each component keeps its weight, the
// mean is inverted and the width picks up the linear scale.
MixtureParams denormalize(const MixtureParams& params,
                          const data::MinMax& scaler);

void save_model(const MdnModel& model, const std::string& path);
MdnModel load_model(const std::string& path);

// One normalized-space mixture per row of a raw feature matrix.
std::vector<MixtureParams> predict_all(const MdnModel& model,
                                       const Eigen::MatrixXd& raw_features);

// Scores on the normalized target band, the scale the optimizer saw.
metrics::ScoreReport score_on(const MdnModel& model,
                              const data::Dataset& test);

}  // namespace cqre::mdn
