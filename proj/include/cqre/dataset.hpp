#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqre/normalize.hpp"
#include "cqre/schema.hpp"

namespace cqre::data {

// One trace table: query ids, the raw feature matrix (N x kFeatureCount)
// and the raw resource targets (N x 2, columns cpu_frac then mem_frac).
struct Dataset {
  std::vector<std::string> ids;
  Eigen::MatrixXd features;
  Eigen::MatrixXd targets;

  int rows() const { return static_cast<int>(features.rows()); }
};

enum class Target { cpu = 0, mem = 1 };

const char* target_name(Target t);
Target parse_target(const std::string& name);

Dataset load_traces(const std::string& path);
void save_traces(const Dataset& ds, const std::string& path);

// Row-index plan for one train/test split.
struct SplitPlan {
  std::vector<int> train_rows;
  std::vector<int> test_rows;
};

SplitPlan split_holdout(int n_rows, double train_fraction, std::uint64_t seed);
std::vector<SplitPlan> split_kfold(int n_rows, int k, std::uint64_t seed);

Dataset take_rows(const Dataset& ds, const std::vector<int>& rows);

// Strong wrappers so normalizer fitting can only ever see training rows.
struct TrainPartition {
  Dataset data;
};
struct TestPartition {
  Dataset data;
};

struct Partitioned {
  TrainPartition train;
  TestPartition test;
};

Partitioned materialize(const Dataset& ds, const SplitPlan& plan);

// Feature/target scalers fitted on a training partition. Constant feature
// columns are dropped (their names land in dropped_features); a constant
// target is an error since the min-max map would be degenerate.
struct Normalizers {
  std::vector<int> feature_columns;
  std::vector<std::string> dropped_features;
  ZScore feature_scaler;
  MinMax cpu_scaler;
  MinMax mem_scaler;

  int input_dim() const { return static_cast<int>(feature_columns.size()); }
  const MinMax& target_scaler(Target t) const {
    return t == Target::cpu ? cpu_scaler : mem_scaler;
  }

  Eigen::MatrixXd apply_features(const Eigen::MatrixXd& raw) const;
  Eigen::VectorXd apply_features_row(const Eigen::VectorXd& raw) const;
  Eigen::VectorXd apply_target(const Eigen::VectorXd& raw, Target t) const;
  double invert_target(double v, Target t) const;
};

Normalizers fit_normalizers(const TrainPartition& train, bool warn = true);

// Keeps only the given positions (indices into feature_columns), e.g. the
// output of a feature-selection pass over the kept columns.
Normalizers restrict_features(const Normalizers& norm,
                              const std::vector<int>& positions);

Eigen::VectorXd target_column(const Dataset& ds, Target t);

}  // namespace cqre::data
