#include "cqre/cql.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace cqre::query {
namespace {

std::string upper_copy(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return out;
}

const char* const kKeywords[] = {"SELECT", "DISTINCT", "FROM",    "WHERE",
                                 "AND",    "GROUP",    "BY",      "AS",
                                 "RANGE",  "ROWS",     "SECONDS", "SLIDE",
                                 "LIKE",   "COUNT",    "SUM",     "AVG",
                                 "MIN",    "MAX"};

bool is_keyword(const std::string& upper) {
  for (const char* k : kKeywords)
    if (upper == k) return true;
  return false;
}

bool is_aggregate_name(const std::string& upper) {
  return upper == "COUNT" || upper == "SUM" || upper == "AVG" ||
         upper == "MIN" || upper == "MAX";
}

enum class Tok { ident, number, string, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::string upper;  // uppercase of text for ident/punct matching
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (true) {
      skip_space();
      Token t = next_token();
      bool done = t.kind == Tok::end;
      tokens.push_back(std::move(t));
      if (done) break;
    }
    return tokens;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++col_;
        ++pos_;
      } else {
        break;
      }
    }
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void take(Token& t, std::size_t n) {
    t.text.append(text_, pos_, n);
    pos_ += n;
    col_ += static_cast<int>(n);
  }

  Token next_token() {
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= text_.size()) {
      t.kind = Tok::end;
      t.text = "end of input";
      return t;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Tok::ident;
      std::size_t n = 0;
      while (pos_ + n < text_.size()) {
        char d = text_[pos_ + n];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_')
          ++n;
        else
          break;
      }
      take(t, n);
      t.upper = upper_copy(t.text);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Tok::number;
      std::size_t n = 0;
      bool dot = false;
      while (pos_ + n < text_.size()) {
        char d = text_[pos_ + n];
        if (std::isdigit(static_cast<unsigned char>(d))) {
          ++n;
        } else if (d == '.' && !dot) {
          dot = true;
          ++n;
        } else {
          break;
        }
      }
      take(t, n);
      return t;
    }
    if (c == '\'') {
      t.kind = Tok::string;
      std::size_t n = 1;
      while (pos_ + n < text_.size() && text_[pos_ + n] != '\'') ++n;
      if (pos_ + n >= text_.size())
        throw ParseError(t.line, t.column, "a closing quote",
                         "end of input");
      take(t, n + 1);
      return t;
    }
    if (c == '<') {
      t.kind = Tok::punct;
      char d = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
      take(t, (d == '=' || d == '>') ? 2 : 1);
      t.upper = t.text;
      return t;
    }
    if (c == '>') {
      t.kind = Tok::punct;
      char d = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
      take(t, d == '=' ? 2 : 1);
      t.upper = t.text;
      return t;
    }
    if (std::string("=,;()[].*").find(c) != std::string::npos) {
      t.kind = Tok::punct;
      take(t, 1);
      t.upper = t.text;
      return t;
    }
    throw ParseError(t.line, t.column, "a query token",
                     "'" + std::string(1, c) + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::end) return "end of input";
  return "'" + t.text + "'";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  QueryAst run() {
    QueryAst ast = select_stmt();
    expect_punct(";");
    if (peek().kind != Tok::end)
      throw ParseError(peek().line, peek().column, "end of input",
                       describe(peek()));
    return ast;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  bool at_keyword(const char* kw) const {
    return peek().kind == Tok::ident && peek().upper == kw;
  }

  bool at_punct(const char* p) const {
    return peek().kind == Tok::punct && peek().text == p;
  }

  const Token& expect_keyword(const char* kw) {
    if (!at_keyword(kw))
      throw ParseError(peek().line, peek().column, std::string(kw),
                       describe(peek()));
    return advance();
  }

  const Token& expect_punct(const char* p) {
    if (!at_punct(p))
      throw ParseError(peek().line, peek().column, "'" + std::string(p) + "'",
                       describe(peek()));
    return advance();
  }

  const Token& expect_ident(const char* what) {
    if (peek().kind != Tok::ident || is_keyword(peek().upper))
      throw ParseError(peek().line, peek().column, what, describe(peek()));
    return advance();
  }

  long long expect_integer(const char* what) {
    if (peek().kind != Tok::number ||
        peek().text.find('.') != std::string::npos)
      throw ParseError(peek().line, peek().column, what, describe(peek()));
    const Token& t = advance();
    long long value = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(),
                                     t.text.data() + t.text.size(), value);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size())
      throw ParseError(t.line, t.column, what, describe(t));
    return value;
  }

  ColumnRef column_ref(const char* what) {
    const Token& first = expect_ident(what);
    ColumnRef ref;
    ref.line = first.line;
    ref.column_pos = first.column;
    if (at_punct(".")) {
      advance();
      const Token& second = expect_ident("a column name after '.'");
      ref.source = first.text;
      ref.column = second.text;
    } else {
      ref.column = first.text;
    }
    return ref;
  }

  SelectItem select_item() {
    SelectItem item;
    if (peek().kind == Tok::ident && is_aggregate_name(peek().upper)) {
      const Token& fn = advance();
      item.is_aggregate = true;
      item.func = fn.upper;
      expect_punct("(");
      if (at_punct("*")) {
        const Token& star = advance();
        item.column.column = "*";
        item.column.line = star.line;
        item.column.column_pos = star.column;
      } else {
        item.column = column_ref("a column name or '*'");
      }
      expect_punct(")");
      return item;
    }
    if (at_punct("*")) {
      const Token& star = advance();
      item.column.column = "*";
      item.column.line = star.line;
      item.column.column_pos = star.column;
      return item;
    }
    item.column = column_ref("a column name, aggregate, or '*'");
    return item;
  }

  std::optional<WindowSpec> window_spec() {
    if (!at_punct("[")) return std::nullopt;
    advance();
    WindowSpec w;
    if (at_keyword("RANGE")) {
      advance();
      w.kind = WindowSpec::Kind::time;
      const Token& size_tok = peek();
      w.size = expect_integer("a window size in seconds");
      if (w.size <= 0)
        throw ParseError(size_tok.line, size_tok.column,
                         "a positive window size", size_tok.text);
      expect_keyword("SECONDS");
      if (at_keyword("SLIDE")) {
        advance();
        w.slide = expect_integer("a slide in seconds");
        expect_keyword("SECONDS");
      }
    } else if (at_keyword("ROWS")) {
      advance();
      w.kind = WindowSpec::Kind::tuple;
      const Token& size_tok = peek();
      w.size = expect_integer("a window size in rows");
      if (w.size <= 0)
        throw ParseError(size_tok.line, size_tok.column,
                         "a positive window size", size_tok.text);
      if (at_keyword("SLIDE")) {
        advance();
        w.slide = expect_integer("a slide in rows");
      }
    } else {
      throw ParseError(peek().line, peek().column, "RANGE or ROWS",
                       describe(peek()));
    }
    expect_punct("]");
    return w;
  }

  FromSource from_source(QueryAst& ast) {
    FromSource src;
    if (at_punct("(")) {
      advance();
      QueryAst sub = select_stmt();
      expect_punct(")");
      if (at_keyword("AS")) advance();
      const Token& alias = expect_ident("an alias for the subquery");
      src.alias = alias.text;
      src.name = alias.text;
      src.subquery_index = static_cast<int>(ast.subqueries.size());
      ast.subqueries.push_back(std::move(sub));
    } else {
      const Token& name = expect_ident("a stream name or subquery");
      src.name = name.text;
      if (at_keyword("AS")) {
        advance();
        const Token& alias = expect_ident("an alias");
        src.alias = alias.text;
      } else if (peek().kind == Tok::ident && !is_keyword(peek().upper)) {
        src.alias = advance().text;
      }
    }
    src.window = window_spec();
    return src;
  }

  Predicate predicate() {
    Predicate p;
    p.lhs = column_ref("a column reference");
    if (at_keyword("LIKE")) {
      advance();
      p.op = "LIKE";
    } else if (peek().kind == Tok::punct &&
               (peek().text == "=" || peek().text == "<" ||
                peek().text == ">" || peek().text == "<=" ||
                peek().text == ">=" || peek().text == "<>")) {
      p.op = advance().text;
    } else {
      throw ParseError(peek().line, peek().column,
                       "a comparator (=, <, >, <=, >=, <>, LIKE)",
                       describe(peek()));
    }
    if (peek().kind == Tok::number) {
      const Token& num = advance();
      p.rhs.kind = Operand::Kind::number;
      auto [ptr, ec] = std::from_chars(
          num.text.data(), num.text.data() + num.text.size(), p.rhs.number);
      if (ec != std::errc() || ptr != num.text.data() + num.text.size())
        throw ParseError(num.line, num.column, "a numeric literal",
                         describe(num));
    } else if (peek().kind == Tok::string) {
      const Token& str = advance();
      p.rhs.kind = Operand::Kind::string;
      p.rhs.text = str.text.substr(1, str.text.size() - 2);
    } else if (peek().kind == Tok::ident && !is_keyword(peek().upper)) {
      p.rhs.kind = Operand::Kind::column;
      p.rhs.column = column_ref("a column reference");
    } else {
      throw ParseError(peek().line, peek().column,
                       "a column, number, or string after the comparator",
                       describe(peek()));
    }
    return p;
  }

  QueryAst select_stmt() {
    QueryAst ast;
    expect_keyword("SELECT");
    if (at_keyword("DISTINCT")) {
      advance();
      ast.distinct = true;
    }
    ast.select_list.push_back(select_item());
    while (at_punct(",")) {
      advance();
      ast.select_list.push_back(select_item());
    }
    expect_keyword("FROM");
    ast.from_sources.push_back(from_source(ast));
    while (at_punct(",")) {
      advance();
      ast.from_sources.push_back(from_source(ast));
    }
    if (at_keyword("WHERE")) {
      advance();
      ast.where_predicates.push_back(predicate());
      while (at_keyword("AND")) {
        advance();
        ast.where_predicates.push_back(predicate());
      }
    }
    if (at_keyword("GROUP")) {
      advance();
      expect_keyword("BY");
      ast.group_by.push_back(column_ref("a grouping column"));
      while (at_punct(",")) {
        advance();
        ast.group_by.push_back(column_ref("a grouping column"));
      }
    }
    return ast;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// Scope resolution: qualified references must name a source visible in the
// current query; a name that only resolves in an enclosing query marks the
// subquery as correlated, which the dialect rejects.
class ScopeChecker {
 public:
  void check(QueryAst& ast) {
    std::vector<std::vector<std::string>> stack;
    walk(ast, stack);
  }

 private:
  static std::string visible_name(const FromSource& src) {
    return src.alias.empty() ? src.name : src.alias;
  }

  void walk(QueryAst& ast, std::vector<std::vector<std::string>>& stack) {
    std::vector<std::string> names;
    names.reserve(ast.from_sources.size());
    for (const FromSource& src : ast.from_sources)
      names.push_back(visible_name(src));
    stack.push_back(std::move(names));

    for (const SelectItem& item : ast.select_list)
      resolve(item.column, stack);
    for (const ColumnRef& ref : ast.group_by) resolve(ref, stack);
    for (Predicate& p : ast.where_predicates) {
      resolve(p.lhs, stack);
      if (p.rhs.kind == Operand::Kind::column) resolve(p.rhs.column, stack);
      p.tag = classify(p);
    }
    for (QueryAst& sub : ast.subqueries) walk(sub, stack);
    stack.pop_back();
  }

  void resolve(const ColumnRef& ref,
               const std::vector<std::vector<std::string>>& stack) const {
    if (ref.source.empty()) return;
    const auto& current = stack.back();
    if (std::find(current.begin(), current.end(), ref.source) !=
        current.end())
      return;
    for (std::size_t i = stack.size() - 1; i-- > 0;) {
      if (std::find(stack[i].begin(), stack[i].end(), ref.source) !=
          stack[i].end())
        throw UnsupportedConstruct(
            "correlated subquery",
            "inner query references outer source '" + ref.source + "'");
    }
    throw ParseError(ref.line, ref.column_pos,
                     "a source visible in the current query",
                     "'" + ref.source + "'");
  }

  static PredicateTag classify(const Predicate& p) {
    if (p.rhs.kind == Operand::Kind::column && !p.lhs.source.empty() &&
        !p.rhs.column.source.empty() && p.lhs.source != p.rhs.column.source)
      return PredicateTag::join;
    if (p.op == "=" || p.op == "LIKE") return PredicateTag::equality;
    return PredicateTag::inequality;
  }
};

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void print_column(std::ostringstream& os, const ColumnRef& ref) {
  if (!ref.source.empty()) os << ref.source << '.';
  os << ref.column;
}

void print_stmt(std::ostringstream& os, const QueryAst& ast) {
  os << "SELECT ";
  if (ast.distinct) os << "DISTINCT ";
  for (std::size_t i = 0; i < ast.select_list.size(); ++i) {
    if (i) os << ", ";
    const SelectItem& item = ast.select_list[i];
    if (item.is_aggregate) {
      os << item.func << '(';
      print_column(os, item.column);
      os << ')';
    } else {
      print_column(os, item.column);
    }
  }
  os << " FROM ";
  for (std::size_t i = 0; i < ast.from_sources.size(); ++i) {
    if (i) os << ", ";
    const FromSource& src = ast.from_sources[i];
    if (src.is_subquery()) {
      os << '(';
      print_stmt(os, ast.subqueries[static_cast<std::size_t>(
                         src.subquery_index)]);
      os << ") AS " << src.alias;
    } else {
      os << src.name;
      if (!src.alias.empty()) os << " AS " << src.alias;
    }
    if (src.window) {
      const WindowSpec& w = *src.window;
      if (w.kind == WindowSpec::Kind::time) {
        os << " [RANGE " << w.size << " SECONDS";
        if (w.slide > 0) os << " SLIDE " << w.slide << " SECONDS";
      } else {
        os << " [ROWS " << w.size;
        if (w.slide > 0) os << " SLIDE " << w.slide;
      }
      os << ']';
    }
  }
  if (!ast.where_predicates.empty()) {
    os << " WHERE ";
    for (std::size_t i = 0; i < ast.where_predicates.size(); ++i) {
      if (i) os << " AND ";
      const Predicate& p = ast.where_predicates[i];
      print_column(os, p.lhs);
      os << ' ' << p.op << ' ';
      switch (p.rhs.kind) {
        case Operand::Kind::column:
          print_column(os, p.rhs.column);
          break;
        case Operand::Kind::number:
          os << format_number(p.rhs.number);
          break;
        case Operand::Kind::string:
          os << '\'' << p.rhs.text << '\'';
          break;
      }
    }
  }
  if (!ast.group_by.empty()) {
    os << " GROUP BY ";
    for (std::size_t i = 0; i < ast.group_by.size(); ++i) {
      if (i) os << ", ";
      print_column(os, ast.group_by[i]);
    }
  }
}

}  // namespace

ParseError::ParseError(int line, int column, const std::string& expected,
                       const std::string& got)
    : std::runtime_error("syntax error at line " + std::to_string(line) +
                         ", column " + std::to_string(column) +
                         ": expected " + expected + ", got " + got),
      line_(line),
      column_(column),
      expected_(expected) {}

UnsupportedConstruct::UnsupportedConstruct(std::string construct,
                                           const std::string& detail)
    : std::runtime_error("unsupported construct (" + construct +
                         "): " + detail),
      construct_(std::move(construct)) {}

QueryAst parse_cql(const std::string& text) {
  if (text.empty()) throw ParseError(1, 1, "a query", "empty input");
  Lexer lexer(text);
  Parser parser(lexer.run());
  QueryAst ast = parser.run();
  ScopeChecker().check(ast);
  return ast;
}

std::string print_cql(const QueryAst& ast) {
  std::ostringstream os;
  print_stmt(os, ast);
  os << ';';
  return os.str();
}

}  // namespace cqre::query
