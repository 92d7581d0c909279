#include "cqre/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "cqre/rng.hpp"

namespace cqre::data {
namespace {

constexpr int kTargetCount = 2;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_field(const std::string& field, int row,
                   std::string_view column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw std::runtime_error("row " + std::to_string(row) + ": column '" +
                             std::string(column) + "' is not numeric: '" +
                             field + "'");
  if (!std::isfinite(value))
    throw std::runtime_error("row " + std::to_string(row) + ": column '" +
                             std::string(column) + "' is not finite");
  return value;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string expected_header() {
  std::string h;
  for (int i = 0; i < kTraceColumnCount; ++i) {
    if (i > 0) h += ',';
    h += kTraceColumns[i];
  }
  return h;
}

}  // namespace

const char* target_name(Target t) {
  return t == Target::cpu ? "cpu" : "mem";
}

Target parse_target(const std::string& name) {
  if (name == "cpu") return Target::cpu;
  if (name == "mem") return Target::mem;
  throw std::invalid_argument("unknown target '" + name +
                              "' (expected cpu or mem)");
}

Dataset load_traces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file, header expected");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header())
    throw std::runtime_error(path + ": unexpected header, want '" +
                             expected_header() + "'");

  std::vector<std::string> ids;
  std::vector<double> feat_values;
  std::vector<double> targ_values;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (static_cast<int>(fields.size()) != kTraceColumnCount)
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": expected " +
                               std::to_string(kTraceColumnCount) +
                               " columns, got " +
                               std::to_string(fields.size()));
    ids.push_back(fields[0]);
    for (int j = 0; j < kFeatureCount; ++j) {
      double v = parse_field(fields[1 + j], row, kFeatureNames[j]);
      if (v < 0.0)
        throw std::runtime_error(path + ": row " + std::to_string(row) +
                                 ": feature '" +
                                 std::string(kFeatureNames[j]) +
                                 "' is negative");
      feat_values.push_back(v);
    }
    for (int j = 0; j < kTargetCount; ++j) {
      std::string_view name = kTraceColumns[1 + kFeatureCount + j];
      double v = parse_field(fields[1 + kFeatureCount + j], row, name);
      if (v < 0.0 || v > 1.0)
        throw std::runtime_error(path + ": row " + std::to_string(row) +
                                 ": target '" + std::string(name) +
                                 "' outside [0, 1]: " + format_double(v));
      targ_values.push_back(v);
    }
  }

  const int n = static_cast<int>(ids.size());
  Dataset ds;
  ds.ids = std::move(ids);
  ds.features.resize(n, kFeatureCount);
  ds.targets.resize(n, kTargetCount);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kFeatureCount; ++j)
      ds.features(i, j) = feat_values[static_cast<std::size_t>(i) *
                                      kFeatureCount + j];
    for (int j = 0; j < kTargetCount; ++j)
      ds.targets(i, j) = targ_values[static_cast<std::size_t>(i) *
                                     kTargetCount + j];
  }
  return ds;
}

void save_traces(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << expected_header() << '\n';
  for (int i = 0; i < ds.rows(); ++i) {
    out << ds.ids[i];
    for (int j = 0; j < kFeatureCount; ++j)
      out << ',' << format_double(ds.features(i, j));
    for (int j = 0; j < kTargetCount; ++j)
      out << ',' << format_double(ds.targets(i, j));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

SplitPlan split_holdout(int n_rows, double train_fraction,
                        std::uint64_t seed) {
  if (n_rows < 2)
    throw std::invalid_argument("split_holdout: need at least 2 rows");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split_holdout: fraction must be in (0, 1)");

  std::vector<int> order(static_cast<std::size_t>(n_rows));
  for (int i = 0; i < n_rows; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);

  int n_train = static_cast<int>(std::llround(train_fraction * n_rows));
  if (n_train < 1) n_train = 1;
  if (n_train > n_rows - 1) n_train = n_rows - 1;

  SplitPlan plan;
  plan.train_rows.assign(order.begin(), order.begin() + n_train);
  plan.test_rows.assign(order.begin() + n_train, order.end());
  return plan;
}

std::vector<SplitPlan> split_kfold(int n_rows, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("split_kfold: k must be >= 2");
  if (k > n_rows)
    throw std::invalid_argument("split_kfold: k exceeds row count");

  std::vector<int> order(static_cast<std::size_t>(n_rows));
  for (int i = 0; i < n_rows; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<SplitPlan> plans;
  plans.reserve(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    int lo = static_cast<int>(static_cast<std::int64_t>(n_rows) * f / k);
    int hi = static_cast<int>(static_cast<std::int64_t>(n_rows) * (f + 1) / k);
    SplitPlan plan;
    for (int i = 0; i < n_rows; ++i) {
      if (i >= lo && i < hi)
        plan.test_rows.push_back(order[static_cast<std::size_t>(i)]);
      else
        plan.train_rows.push_back(order[static_cast<std::size_t>(i)]);
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

Dataset take_rows(const Dataset& ds, const std::vector<int>& rows) {
  Dataset out;
  const int n = static_cast<int>(rows.size());
  out.ids.reserve(rows.size());
  out.features.resize(n, ds.features.cols());
  out.targets.resize(n, ds.targets.cols());
  for (int i = 0; i < n; ++i) {
    int r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= ds.rows())
      throw std::out_of_range("take_rows: row index out of range");
    out.ids.push_back(ds.ids[static_cast<std::size_t>(r)]);
    out.features.row(i) = ds.features.row(r);
    out.targets.row(i) = ds.targets.row(r);
  }
  return out;
}

Partitioned materialize(const Dataset& ds, const SplitPlan& plan) {
  return Partitioned{TrainPartition{take_rows(ds, plan.train_rows)},
                     TestPartition{take_rows(ds, plan.test_rows)}};
}

Eigen::MatrixXd Normalizers::apply_features(const Eigen::MatrixXd& raw) const {
  if (raw.cols() != kFeatureCount)
    throw std::invalid_argument("apply_features: expected full feature width");
  Eigen::MatrixXd kept(raw.rows(), input_dim());
  for (int j = 0; j < input_dim(); ++j)
    kept.col(j) = raw.col(feature_columns[static_cast<std::size_t>(j)]);
  return feature_scaler.apply(kept);
}

Eigen::VectorXd Normalizers::apply_features_row(
    const Eigen::VectorXd& raw) const {
  if (raw.size() != kFeatureCount)
    throw std::invalid_argument(
        "apply_features_row: expected full feature width");
  Eigen::VectorXd kept(input_dim());
  for (int j = 0; j < input_dim(); ++j)
    kept(j) = raw(feature_columns[static_cast<std::size_t>(j)]);
  return feature_scaler.apply(kept);
}

Eigen::VectorXd Normalizers::apply_target(const Eigen::VectorXd& raw,
                                          Target t) const {
  const MinMax& mm = target_scaler(t);
  Eigen::VectorXd out(raw.size());
  for (int i = 0; i < raw.size(); ++i) out(i) = mm.apply(raw(i));
  return out;
}

double Normalizers::invert_target(double v, Target t) const {
  return target_scaler(t).invert(v);
}

Normalizers fit_normalizers(const TrainPartition& train, bool warn) {
  const Dataset& ds = train.data;
  if (ds.rows() < 2)
    throw std::invalid_argument(
        "fit_normalizers: need at least 2 training rows");

  Normalizers norm;
  const int n = ds.rows();
  std::vector<double> means, stds;
  for (int j = 0; j < kFeatureCount; ++j) {
    double mean = ds.features.col(j).mean();
    double ss = (ds.features.col(j).array() - mean).square().sum();
    double sd = std::sqrt(ss / (n - 1));
    if (sd > 0.0) {
      norm.feature_columns.push_back(j);
      means.push_back(mean);
      stds.push_back(sd);
    } else {
      norm.dropped_features.push_back(std::string(kFeatureNames[j]));
    }
  }
  if (norm.feature_columns.empty())
    throw std::runtime_error(
        "fit_normalizers: every feature column is constant");
  if (warn && !norm.dropped_features.empty()) {
    std::cerr << "warning: dropping constant feature column(s):";
    for (const auto& name : norm.dropped_features) std::cerr << ' ' << name;
    std::cerr << '\n';
  }

  norm.feature_scaler.mean =
      Eigen::Map<const Eigen::VectorXd>(means.data(),
                                        static_cast<int>(means.size()));
  norm.feature_scaler.stddev =
      Eigen::Map<const Eigen::VectorXd>(stds.data(),
                                        static_cast<int>(stds.size()));

  for (int j = 0; j < 2; ++j) {
    Target t = static_cast<Target>(j);
    double lo = ds.targets.col(j).minCoeff();
    double hi = ds.targets.col(j).maxCoeff();
    if (!(hi > lo))
      throw std::runtime_error(std::string("fit_normalizers: target '") +
                               target_name(t) +
                               "' is constant in the training partition");
    MinMax mm;
    mm.in_min = lo;
    mm.in_max = hi;
    if (t == Target::cpu)
      norm.cpu_scaler = mm;
    else
      norm.mem_scaler = mm;
  }
  return norm;
}

Normalizers restrict_features(const Normalizers& norm,
                              const std::vector<int>& positions) {
  if (positions.empty())
    throw std::invalid_argument("restrict_features: empty selection");
  Normalizers out;
  out.dropped_features = norm.dropped_features;
  out.cpu_scaler = norm.cpu_scaler;
  out.mem_scaler = norm.mem_scaler;
  const int k = static_cast<int>(positions.size());
  out.feature_scaler.mean.resize(k);
  out.feature_scaler.stddev.resize(k);
  for (int i = 0; i < k; ++i) {
    const int pos = positions[static_cast<std::size_t>(i)];
    if (pos < 0 || pos >= norm.input_dim())
      throw std::out_of_range("restrict_features: position out of range");
    out.feature_columns.push_back(
        norm.feature_columns[static_cast<std::size_t>(pos)]);
    out.feature_scaler.mean(i) = norm.feature_scaler.mean(pos);
    out.feature_scaler.stddev(i) = norm.feature_scaler.stddev(pos);
  }
  return out;
}

Eigen::VectorXd target_column(const Dataset& ds, Target t) {
  return ds.targets.col(static_cast<int>(t));
}

}  // namespace cqre::data
