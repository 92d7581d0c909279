#include "cqre/features.hpp"

#include <charconv>
#include <stdexcept>

#include "json.hpp"

namespace cqre::query {
namespace {

void append_plan(const QueryAst& ast, std::vector<OpType>& plan) {
  for (const QueryAst& sub : ast.subqueries) append_plan(sub, plan);

  for (const FromSource& src : ast.from_sources)
    if (src.window) plan.push_back(OpType::window);

  int joins = 0;
  bool filter = false;
  for (const Predicate& p : ast.where_predicates) {
    if (p.tag == PredicateTag::join)
      ++joins;
    else
      filter = true;
  }
  for (int i = 0; i < joins; ++i) plan.push_back(OpType::join);
  if (filter) plan.push_back(OpType::filter);

  bool aggregate = !ast.group_by.empty();
  for (const SelectItem& item : ast.select_list)
    if (item.is_aggregate) aggregate = true;
  if (aggregate) plan.push_back(OpType::aggregate);

  plan.push_back(OpType::project);
  if (ast.distinct) plan.push_back(OpType::distinct);
}

// Window size comparison spans both kinds; the raw magnitudes are compared
// directly since the schema keeps one size column for both units.
void largest_window(const QueryAst& ast, const WindowSpec** best) {
  for (const FromSource& src : ast.from_sources) {
    if (src.window && (*best == nullptr || src.window->size > (*best)->size))
      *best = &*src.window;
  }
  for (const QueryAst& sub : ast.subqueries) largest_window(sub, best);
}

void count_ast(const QueryAst& ast, QueryFeatures& f) {
  f.stream_no += static_cast<int>(ast.from_sources.size());
  f.subquery_no += static_cast<int>(ast.subqueries.size());
  for (const SelectItem& item : ast.select_list)
    if (item.is_aggregate) ++f.agg_func_no;
  for (const Predicate& p : ast.where_predicates) {
    switch (p.tag) {
      case PredicateTag::join:
        ++f.join_predicate;
        break;
      case PredicateTag::equality:
        ++f.equ_select_predicate;
        break;
      case PredicateTag::inequality:
        ++f.inequ_select_predicate;
        break;
    }
  }
  f.agg_column_no += static_cast<int>(ast.group_by.size());
  for (const QueryAst& sub : ast.subqueries) count_ast(sub, f);
}

}  // namespace

const char* op_name(OpType op) {
  switch (op) {
    case OpType::window:
      return "window";
    case OpType::filter:
      return "filter";
    case OpType::project:
      return "project";
    case OpType::join:
      return "join";
    case OpType::aggregate:
      return "aggregate";
    case OpType::distinct:
      return "distinct";
  }
  throw std::logic_error("op_name: bad operator");
}

std::vector<OpType> logical_plan(const QueryAst& ast) {
  std::vector<OpType> plan;
  append_plan(ast, plan);
  return plan;
}

Eigen::VectorXd QueryFeatures::to_vector() const {
  Eigen::VectorXd v(kFeatureCount);
  v << avg_arrival_rate, stream_no, subquery_no, agg_func_no, join_predicate,
      project_size, equ_select_predicate, inequ_select_predicate,
      agg_column_no, opt_window, opt_filter, opt_project, opt_join,
      opt_aggregate, opt_distinct, static_cast<double>(win_type_size),
      static_cast<double>(win_type_slide);
  return v;
}

std::string QueryFeatures::to_json() const {
  nlohmann::json j;
  const Eigen::VectorXd v = to_vector();
  for (int i = 0; i < kFeatureCount; ++i) {
    std::string name(kFeatureNames[static_cast<std::size_t>(i)]);
    if (name == "avg_arrival_rate")
      j[name] = v(i);
    else
      j[name] = static_cast<long long>(v(i));
  }
  return j.dump(2);
}

std::string QueryFeatures::to_csv_row() const {
  const Eigen::VectorXd v = to_vector();
  std::string row;
  char buf[32];
  for (int i = 0; i < kFeatureCount; ++i) {
    if (i) row += ',';
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v(i));
    row.append(buf, ptr);
  }
  return row;
}

QueryFeatures extract_features(const QueryAst& ast, double avg_arrival_rate) {
  if (!(avg_arrival_rate > 0.0))
    throw std::invalid_argument(
        "extract_features: avg_arrival_rate must be positive");

  QueryFeatures f;
  f.avg_arrival_rate = avg_arrival_rate;
  count_ast(ast, f);
  f.project_size = static_cast<int>(ast.select_list.size());

  for (OpType op : logical_plan(ast)) {
    switch (op) {
      case OpType::window:
        ++f.opt_window;
        break;
      case OpType::filter:
        ++f.opt_filter;
        break;
      case OpType::project:
        ++f.opt_project;
        break;
      case OpType::join:
        ++f.opt_join;
        break;
      case OpType::aggregate:
        ++f.opt_aggregate;
        break;
      case OpType::distinct:
        ++f.opt_distinct;
        break;
    }
  }

  const WindowSpec* best = nullptr;
  largest_window(ast, &best);
  if (best) {
    f.win_type_size = best->size;
    f.win_type_slide = best->slide;
  }
  return f;
}

}  // namespace cqre::query
