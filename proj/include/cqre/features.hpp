#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqre/cql.hpp"
#include "cqre/schema.hpp"

namespace cqre::query {

// The fixed operator vocabulary counted by the opt_* features.
enum class OpType { window, filter, project, join, aggregate, distinct };

const char* op_name(OpType op);

// Deterministic operator list: subquery plans first (in source order),
// then for the query itself windows, joins, filter, aggregate, project,
// distinct, each emitted only when the clause that implies it is present.
std::vector<OpType> logical_plan(const QueryAst& ast);

struct QueryFeatures {
  double avg_arrival_rate = 0.0;
  int stream_no = 0;
  int subquery_no = 0;
  int agg_func_no = 0;
  int join_predicate = 0;
  int project_size = 0;
  int equ_select_predicate = 0;
  int inequ_select_predicate = 0;
  int agg_column_no = 0;
  int opt_window = 0;
  int opt_filter = 0;
  int opt_project = 0;
  int opt_join = 0;
  int opt_aggregate = 0;
  int opt_distinct = 0;
  long long win_type_size = 0;
  long long win_type_slide = 0;

  // In kFeatureNames order.
  Eigen::VectorXd to_vector() const;
  std::string to_json() const;
  std::string to_csv_row() const;
};

QueryFeatures extract_features(const QueryAst& ast, double avg_arrival_rate);

}  // namespace cqre::query
