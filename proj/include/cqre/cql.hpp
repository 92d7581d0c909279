#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqre::query {

// Positioned syntax error. line/column are 1-based over the input text.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& expected,
             const std::string& got);

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& expected() const { return expected_; }

 private:
  int line_;
  int column_;
  std::string expected_;
};

// Grammar-level constructs we deliberately reject, e.g. correlated
// subqueries.
class UnsupportedConstruct : public std::runtime_error {
 public:
  UnsupportedConstruct(std::string construct, const std::string& detail);
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

struct WindowSpec {
  enum class Kind { time, tuple };
  Kind kind = Kind::time;
  long long size = 0;   // seconds for time windows, rows for tuple windows
  long long slide = 0;  // 0 means unspecified

  bool operator==(const WindowSpec&) const = default;
};

struct ColumnRef {
  std::string source;  // optional qualifier, empty when unqualified
  std::string column;  // "*" allowed in select lists and COUNT(*)
  int line = 0;        // position kept for diagnostics only
  int column_pos = 0;

  bool operator==(const ColumnRef& o) const {
    return source == o.source && column == o.column;
  }
};

struct SelectItem {
  bool is_aggregate = false;
  std::string func;  // COUNT, SUM, AVG, MIN, MAX; empty for plain columns
  ColumnRef column;

  bool operator==(const SelectItem&) const = default;
};

struct Operand {
  enum class Kind { column, number, string };
  Kind kind = Kind::number;
  ColumnRef column;
  double number = 0.0;
  std::string text;

  bool operator==(const Operand&) const = default;
};

enum class PredicateTag { equality, inequality, join };

struct Predicate {
  ColumnRef lhs;
  std::string op;  // =, <, >, <=, >=, <>, LIKE
  Operand rhs;
  PredicateTag tag = PredicateTag::equality;

  bool operator==(const Predicate&) const = default;
};

struct QueryAst;

struct FromSource {
  std::string name;   // stream name, or the alias of a derived source
  std::string alias;  // optional for streams, required for subqueries
  std::optional<WindowSpec> window;
  int subquery_index = -1;  // into QueryAst::subqueries, -1 for streams

  bool is_subquery() const { return subquery_index >= 0; }
  bool operator==(const FromSource&) const = default;
};

struct QueryAst {
  bool distinct = false;
  std::vector<SelectItem> select_list;
  std::vector<FromSource> from_sources;
  std::vector<Predicate> where_predicates;
  std::vector<ColumnRef> group_by;
  std::vector<QueryAst> subqueries;

  bool operator==(const QueryAst&) const = default;
};

QueryAst parse_cql(const std::string& text);

// Canonical form: uppercase keywords, single spacing, explicit AS.
// parse_cql(print_cql(ast)) == ast for every parseable input.
std::string print_cql(const QueryAst& ast);

}  // namespace cqre::query
