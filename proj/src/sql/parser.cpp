// Copyright 2026 The hetfed Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hetfed/sql/parser.h"

#include <cctype>
#include <set>

#include "hetfed/error.h"
#include "hetfed/sql/render.h"
#include "hetfed/text.h"
#include "resolve_internal.h"

namespace hetfed::sql {

namespace {

struct Token {
  enum class Kind { ident, quoted_ident, string, dq_string, integer, real, op, end };
  Kind kind = Kind::end;
  std::string text;
  SourceSpan span;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip();
      if (pos_ >= s_.size()) break;
      out.push_back(next());
    }
    Token end;
    end.span = here(0);
    out.push_back(end);
    return out;
  }

 private:
  SourceSpan here(int length) const { return {static_cast<int>(pos_), length, line_, col_}; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < s_.size(); ++i) {
      if (s_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '-' && peek(1) == '-') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        const int line = line_, col = col_;
        advance(2);
        while (pos_ < s_.size() && !(s_[pos_] == '*' && peek(1) == '/')) advance();
        if (pos_ >= s_.size()) throw ParseError("unterminated comment", line, col);
        advance(2);
      } else {
        break;
      }
    }
  }

  char peek(std::size_t k) const { return pos_ + k < s_.size() ? s_[pos_ + k] : '\0'; }

  Token make(Token::Kind kind, std::size_t begin, SourceSpan span) {
    span.length = static_cast<int>(pos_ - begin);
    return {kind, std::string(s_.substr(begin, pos_ - begin)), span};
  }

  Token next() {
    const SourceSpan span = here(0);
    const std::size_t begin = pos_;
    const char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                  s_[pos_] == '$'))
        advance();
      return make(Token::Kind::ident, begin, span);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      bool real = false;
      if (c == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
        advance(2);
        while (std::isxdigit(static_cast<unsigned char>(peek(0)))) advance();
        return make(Token::Kind::integer, begin, span);
      }
      while (std::isdigit(static_cast<unsigned char>(peek(0)))) advance();
      if (peek(0) == '.') {
        real = true;
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek(0)))) advance();
      }
      if (peek(0) == 'e' || peek(0) == 'E') {
        std::size_t k = 1;
        if (peek(k) == '+' || peek(k) == '-') ++k;
        if (std::isdigit(static_cast<unsigned char>(peek(k)))) {
          real = true;
          advance(k);
          while (std::isdigit(static_cast<unsigned char>(peek(0)))) advance();
        }
      }
      if (std::isalpha(static_cast<unsigned char>(peek(0))) || peek(0) == '_')
        throw ParseError("malformed number", span.line, span.column);
      return make(real ? Token::Kind::real : Token::Kind::integer, begin, span);
    }
    if (c == '\'' || c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : c;
      advance();
      while (true) {
        if (pos_ >= s_.size()) throw ParseError("unterminated quoted token", span.line, span.column);
        if (s_[pos_] == close) {
          if (close != ']' && peek(1) == close) {
            advance(2);
            continue;
          }
          advance();
          break;
        }
        advance();
      }
      Token::Kind kind = c == '\'' ? Token::Kind::string : c == '"' ? Token::Kind::dq_string : Token::Kind::quoted_ident;
      Token t = make(kind, begin, span);
      if (kind == Token::Kind::quoted_ident) {
        // Strip delimiters and collapse doubled backticks.
        std::string inner;
        for (std::size_t i = 1; i + 1 < t.text.size(); ++i) {
          inner += t.text[i];
          if (close == '`' && t.text[i] == '`') ++i;
        }
        t.text = inner;
      }
      return t;
    }
    static const char* two_char[] = {"||", "<=", ">=", "<>", "!=", "==", ":=", "=>"};
    for (const char* op : two_char) {
      if (c == op[0] && peek(1) == op[1]) {
        advance(2);
        return make(Token::Kind::op, begin, span);
      }
    }
    if (std::string_view("(),.*+-/%=<>;").find(c) != std::string_view::npos) {
      advance();
      return make(Token::Kind::op, begin, span);
    }
    if (c == '?' || c == ':' || c == '@' || c == '$')
      throw UnsupportedError("bound parameter", span.line, span.column);
    throw ParseError(std::string("unexpected character '") + c + "'", span.line, span.column);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::set<std::string>& aggregates() {
  static const std::set<std::string> s = {"count", "sum", "avg", "min", "max"};
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(Lexer(text).run()) {}

  QueryAst run() {
    reject_statement();
    QueryAst ast;
    ast.root = query();
    if (is_op(";")) ++i_;
    if (cur().kind != Token::Kind::end) fail("unexpected '" + cur().text + "'");
    ast.occurrence_count = next_occurrence_;
    return ast;
  }

 private:
  const Token& cur() const { return tokens_[i_]; }
  const Token& ahead(std::size_t k) const { return tokens_[std::min(i_ + k, tokens_.size() - 1)]; }

  bool is_kw(const char* kw) const { return is_kw_at(0, kw); }
  bool is_kw_at(std::size_t k, const char* kw) const {
    const auto& t = ahead(k);
    return t.kind == Token::Kind::ident && text::iequals(t.text, kw);
  }
  bool is_op(const char* op) const { return cur().kind == Token::Kind::op && cur().text == op; }

  bool accept_kw(const char* kw) {
    if (!is_kw(kw)) return false;
    ++i_;
    return true;
  }
  bool accept_op(const char* op) {
    if (!is_op(op)) return false;
    ++i_;
    return true;
  }
  void expect_kw(const char* kw) {
    if (!accept_kw(kw)) fail(std::string("expected ") + kw);
  }
  void expect_op(const char* op) {
    if (!accept_op(op)) fail(std::string("expected '") + op + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = cur();
    std::string found = t.kind == Token::Kind::end ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", found " + found, t.span.line, t.span.column);
  }
  [[noreturn]] void unsupported(const std::string& construct) const {
    throw UnsupportedError(construct, cur().span.line, cur().span.column);
  }

  void reject_statement() {
    static const char* dml[] = {"INSERT", "UPDATE", "DELETE", "CREATE", "DROP",    "ALTER",  "REPLACE",
                                "PRAGMA", "ATTACH", "DETACH", "VACUUM", "ANALYZE", "EXPLAIN", "BEGIN"};
    for (const char* kw : dml)
      if (is_kw(kw)) unsupported(std::string(kw) + " statement");
    if (is_kw("WITH")) unsupported("WITH clause");
    if (is_kw("VALUES")) unsupported("VALUES clause");
  }

  // A word usable as an identifier (not a reserved keyword).
  bool at_name() const {
    const auto& t = cur();
    if (t.kind == Token::Kind::quoted_ident) return true;
    return t.kind == Token::Kind::ident && !is_keyword(t.text);
  }

  std::string name(SourceSpan* span = nullptr) {
    if (!at_name()) fail("expected an identifier");
    if (span) *span = cur().span;
    return tokens_[i_++].text;
  }

  std::optional<std::string> alias() {
    if (accept_kw("AS")) {
      if (cur().kind == Token::Kind::string || cur().kind == Token::Kind::dq_string) {
        std::string raw = tokens_[i_++].text;
        return raw.substr(1, raw.size() - 2);
      }
      return name();
    }
    if (at_name()) return name();
    return std::nullopt;
  }

  // query := core { setop core } [ORDER BY ...] [LIMIT ...]
  Query query() {
    Query q{select_core()};
    while (true) {
      std::optional<SetOp> op;
      if (accept_kw("UNION")) {
        op = accept_kw("ALL") ? SetOp::union_all : SetOp::union_distinct;
      } else if (accept_kw("INTERSECT")) {
        op = SetOp::intersect;
      } else if (accept_kw("EXCEPT")) {
        op = SetOp::except;
      }
      if (!op) break;
      Compound c;
      c.op = *op;
      c.left = std::move(q);
      c.right = Query{select_core()};
      q = Query{std::move(c)};
    }
    std::vector<OrderItem> order;
    std::optional<Expr> limit, offset;
    if (accept_kw("ORDER")) {
      expect_kw("BY");
      do {
        OrderItem item{expr(), SortDir::unspecified};
        if (accept_kw("ASC")) {
          item.dir = SortDir::asc;
        } else if (accept_kw("DESC")) {
          item.dir = SortDir::desc;
        }
        if (is_kw("NULLS")) unsupported("NULLS FIRST/LAST");
        if (is_kw("COLLATE")) unsupported("COLLATE");
        order.push_back(std::move(item));
      } while (accept_op(","));
    }
    if (accept_kw("LIMIT")) {
      limit = expr();
      if (accept_kw("OFFSET")) {
        offset = expr();
      } else if (accept_op(",")) {
        // LIMIT offset, count
        offset = std::move(limit);
        limit = expr();
      }
    }
    if (auto* s = q.select()) {
      s->order_by = std::move(order);
      s->limit = std::move(limit);
      s->offset = std::move(offset);
    } else {
      auto* c = q.compound();
      c->order_by = std::move(order);
      c->limit = std::move(limit);
      c->offset = std::move(offset);
    }
    return q;
  }

  Select select_core() {
    if (is_op("(")) unsupported("parenthesized compound operand");
    if (is_kw("VALUES")) unsupported("VALUES clause");
    expect_kw("SELECT");
    Select s;
    if (accept_kw("DISTINCT")) {
      s.distinct = true;
    } else {
      accept_kw("ALL");
    }
    do {
      SelectItem item{expr(), std::nullopt};
      if (!item.expr.as<Star>()) item.alias = alias();
      s.items.push_back(std::move(item));
    } while (accept_op(","));
    if (accept_kw("FROM")) s.from = from_clause();
    if (accept_kw("WHERE")) s.where = expr();
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      do {
        s.group_by.push_back(expr());
      } while (accept_op(","));
    }
    if (accept_kw("HAVING")) s.having = expr();
    if (is_kw("WINDOW")) unsupported("WINDOW clause");
    return s;
  }

  TableRef from_clause() {
    TableRef left = table_primary();
    while (true) {
      JoinKind kind;
      if (accept_op(",")) {
        kind = JoinKind::comma;
      } else if (is_kw("NATURAL")) {
        unsupported("NATURAL JOIN");
      } else if (is_kw("RIGHT") || is_kw("FULL")) {
        unsupported(text::upper(cur().text) + " JOIN");
      } else if (accept_kw("LEFT")) {
        accept_kw("OUTER");
        expect_kw("JOIN");
        kind = JoinKind::left;
      } else if (accept_kw("CROSS")) {
        expect_kw("JOIN");
        kind = JoinKind::cross;
      } else if (accept_kw("INNER")) {
        expect_kw("JOIN");
        kind = JoinKind::inner;
      } else if (accept_kw("JOIN")) {
        kind = JoinKind::inner;
      } else {
        break;
      }
      Join j;
      j.kind = kind;
      j.left = std::move(left);
      j.right = table_primary();
      if (accept_kw("ON")) {
        if (kind == JoinKind::comma) fail("ON after a comma join");
        j.on = expr();
      } else if (is_kw("USING")) {
        unsupported("JOIN ... USING");
      }
      left = TableRef{std::move(j)};
    }
    return left;
  }

  TableRef table_primary() {
    const SourceSpan span = cur().span;
    if (accept_op("(")) {
      if (!is_kw("SELECT")) unsupported("parenthesized join");
      DerivedTable d;
      d.occurrence = next_occurrence_++;
      d.query = query();
      expect_op(")");
      d.alias = alias();
      d.span = span;
      return TableRef{std::move(d)};
    }
    SourceSpan name_span;
    std::string table = name(&name_span);
    if (accept_op(".")) table = name(&name_span);  // schema-qualified; schema ignored
    if (accept_op("(")) {
      TableFunction f;
      f.name = table;
      f.span = name_span;
      f.occurrence = next_occurrence_++;
      if (!is_op(")")) {
        do {
          NamedArg arg;
          arg.param = name(&arg.span);
          if (!accept_op(":=") && !accept_op("=>")) fail("table function arguments must be written as name := value");
          arg.value = literal_value();
          f.args.push_back(std::move(arg));
        } while (accept_op(","));
      }
      expect_op(")");
      f.alias = alias();
      return TableRef{std::move(f)};
    }
    TableName t;
    t.name = table;
    t.span = name_span;
    t.occurrence = next_occurrence_++;
    if (is_kw("INDEXED")) unsupported("INDEXED BY");
    t.alias = alias();
    return TableRef{std::move(t)};
  }

  Literal literal_value() {
    bool negative = false;
    if (accept_op("-")) negative = true;
    const auto& t = cur();
    Literal lit;
    switch (t.kind) {
      case Token::Kind::integer:
        lit = {Literal::Kind::integer, t.text};
        break;
      case Token::Kind::real:
        lit = {Literal::Kind::real, t.text};
        break;
      case Token::Kind::string:
      case Token::Kind::dq_string:
        if (negative) fail("expected a number");
        lit = {Literal::Kind::string, t.text};
        break;
      default:
        if (!negative && is_kw("NULL")) {
          lit = {Literal::Kind::null, "NULL"};
          break;
        }
        fail("expected a literal");
    }
    ++i_;
    if (negative) lit.raw = "-" + lit.raw;
    return lit;
  }

  // Expression grammar, loosest binding first.
  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (is_kw("OR")) {
      const SourceSpan span = cur().span;
      ++i_;
      lhs = Expr{Binary{BinaryOp::logical_or, std::move(lhs), and_expr()}, span};
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = not_expr();
    while (is_kw("AND")) {
      const SourceSpan span = cur().span;
      ++i_;
      lhs = Expr{Binary{BinaryOp::logical_and, std::move(lhs), not_expr()}, span};
    }
    return lhs;
  }

  Expr not_expr() {
    if (is_kw("NOT")) {
      const SourceSpan span = cur().span;
      ++i_;
      return Expr{Unary{UnaryOp::logical_not, not_expr()}, span};
    }
    return equality();
  }

  Expr equality() {
    Expr lhs = comparison();
    while (true) {
      const SourceSpan span = cur().span;
      if (is_op("=") || is_op("==") || is_op("!=") || is_op("<>")) {
        BinaryOp op = (is_op("=") || is_op("==")) ? BinaryOp::eq : BinaryOp::ne;
        ++i_;
        lhs = Expr{Binary{op, std::move(lhs), comparison()}, span};
        continue;
      }
      if (is_kw("ISNULL") || is_kw("NOTNULL")) {
        bool negated = is_kw("NOTNULL");
        ++i_;
        lhs = Expr{IsNull{std::move(lhs), negated}, span};
        continue;
      }
      if (is_kw("IS")) {
        ++i_;
        bool negated = accept_kw("NOT");
        if (!accept_kw("NULL")) unsupported("IS with a non-NULL operand");
        lhs = Expr{IsNull{std::move(lhs), negated}, span};
        continue;
      }
      bool negated = false;
      if (is_kw("NOT") && (is_kw_at(1, "IN") || is_kw_at(1, "LIKE") || is_kw_at(1, "BETWEEN") ||
                           is_kw_at(1, "GLOB") || is_kw_at(1, "NULL"))) {
        ++i_;
        negated = true;
        if (accept_kw("NULL")) {
          lhs = Expr{IsNull{std::move(lhs), true}, span};
          continue;
        }
      }
      if (accept_kw("LIKE")) {
        Expr rhs = comparison();
        if (is_kw("ESCAPE")) unsupported("LIKE ... ESCAPE");
        lhs = Expr{Binary{negated ? BinaryOp::not_like : BinaryOp::like, std::move(lhs), std::move(rhs)}, span};
        continue;
      }
      if (is_kw("GLOB") || is_kw("REGEXP") || is_kw("MATCH")) unsupported(text::upper(cur().text));
      if (accept_kw("BETWEEN")) {
        Expr low = comparison();
        expect_kw("AND");
        Expr high = comparison();
        lhs = Expr{Between{std::move(lhs), std::move(low), std::move(high), negated}, span};
        continue;
      }
      if (accept_kw("IN")) {
        expect_op("(");
        if (is_kw("SELECT")) {
          Query q = query();
          expect_op(")");
          lhs = Expr{InQuery{std::move(lhs), std::move(q), negated}, span};
        } else {
          InList in{std::move(lhs), {}, negated};
          if (!is_op(")")) {
            do {
              in.items.push_back(expr());
            } while (accept_op(","));
          }
          expect_op(")");
          lhs = Expr{std::move(in), span};
        }
        continue;
      }
      if (negated) fail("expected IN, LIKE or BETWEEN after NOT");
      break;
    }
    return lhs;
  }

  Expr comparison() {
    Expr lhs = additive();
    while (true) {
      const SourceSpan span = cur().span;
      BinaryOp op;
      if (is_op("<")) {
        op = BinaryOp::lt;
      } else if (is_op("<=")) {
        op = BinaryOp::le;
      } else if (is_op(">")) {
        op = BinaryOp::gt;
      } else if (is_op(">=")) {
        op = BinaryOp::ge;
      } else {
        break;
      }
      ++i_;
      lhs = Expr{Binary{op, std::move(lhs), additive()}, span};
    }
    return lhs;
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (is_op("+") || is_op("-")) {
      const SourceSpan span = cur().span;
      BinaryOp op = is_op("+") ? BinaryOp::add : BinaryOp::sub;
      ++i_;
      lhs = Expr{Binary{op, std::move(lhs), multiplicative()}, span};
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = concat();
    while (is_op("*") || is_op("/") || is_op("%")) {
      const SourceSpan span = cur().span;
      BinaryOp op = is_op("*") ? BinaryOp::mul : is_op("/") ? BinaryOp::div : BinaryOp::mod;
      ++i_;
      lhs = Expr{Binary{op, std::move(lhs), concat()}, span};
    }
    return lhs;
  }

  Expr concat() {
    Expr lhs = unary();
    while (is_op("||")) {
      const SourceSpan span = cur().span;
      ++i_;
      lhs = Expr{Binary{BinaryOp::concat, std::move(lhs), unary()}, span};
    }
    return lhs;
  }

  Expr unary() {
    const SourceSpan span = cur().span;
    if (accept_op("-")) return Expr{Unary{UnaryOp::negate, unary()}, span};
    if (accept_op("+")) return Expr{Unary{UnaryOp::plus, unary()}, span};
    if (is_op("~")) unsupported("bitwise operator");
    Expr e = primary();
    if (is_kw("COLLATE")) unsupported("COLLATE");
    return e;
  }

  Expr primary() {
    const Token& t = cur();
    const SourceSpan span = t.span;
    switch (t.kind) {
      case Token::Kind::integer:
        ++i_;
        return Expr{Literal{Literal::Kind::integer, t.text}, span};
      case Token::Kind::real:
        ++i_;
        return Expr{Literal{Literal::Kind::real, t.text}, span};
      case Token::Kind::string:
      case Token::Kind::dq_string:
        // Double-quoted tokens in expressions are string literals.
        ++i_;
        return Expr{Literal{Literal::Kind::string, t.text}, span};
      case Token::Kind::end:
        fail("expected an expression");
      default:
        break;
    }
    if (accept_op("*")) return Expr{Star{}, span};
    if (accept_op("(")) {
      if (is_kw("SELECT")) {
        Query q = query();
        expect_op(")");
        return Expr{ScalarQuery{std::move(q)}, span};
      }
      Expr inner = expr();
      if (is_op(",")) unsupported("row value");
      expect_op(")");
      inner.span = span;
      return inner;
    }
    if (t.kind == Token::Kind::op) fail("expected an expression");
    if (t.kind == Token::Kind::ident) {
      const std::string up = text::upper(t.text);
      if (up == "NULL") {
        ++i_;
        return Expr{Literal{Literal::Kind::null, "NULL"}, span};
      }
      if (up == "EXISTS") {
        ++i_;
        expect_op("(");
        Query q = query();
        expect_op(")");
        return Expr{Exists{std::move(q)}, span};
      }
      if (up == "CASE" || up == "CAST" || up == "RAISE") unsupported(up + " expression");
      if (up == "CURRENT_DATE" || up == "CURRENT_TIME" || up == "CURRENT_TIMESTAMP") unsupported(up);
    }
    if (ahead(1).kind == Token::Kind::op && ahead(1).text == "(" &&
        (t.kind == Token::Kind::ident || t.kind == Token::Kind::quoted_ident)) {
      return function_call();
    }
    SourceSpan first_span;
    std::string first = name(&first_span);
    if (accept_op(".")) {
      if (accept_op("*")) return Expr{Star{first}, span};
      ColumnRef c;
      c.qualifier = first;
      c.qualifier_span = first_span;
      c.name = name(&c.span);
      if (is_op(".")) unsupported("schema-qualified column");
      return Expr{std::move(c), span};
    }
    ColumnRef c;
    c.name = first;
    c.span = first_span;
    return Expr{std::move(c), span};
  }

  Expr function_call() {
    const SourceSpan span = cur().span;
    const std::string fname = text::lower(cur().text);
    if (!aggregates().count(fname)) unsupported("function '" + fname + "'");
    i_ += 2;
    Function f;
    f.name = fname;
    if (accept_op("*")) {
      if (fname != "count") fail("'*' is only valid in count(*)");
      f.star = true;
    } else {
      if (accept_kw("DISTINCT")) f.distinct = true;
      do {
        f.args.push_back(expr());
      } while (accept_op(","));
    }
    expect_op(")");
    if (is_kw("OVER") || is_kw("FILTER")) unsupported("window function");
    return Expr{std::move(f), span};
  }

  std::vector<Token> tokens_;
  std::size_t i_ = 0;
  int next_occurrence_ = 0;
};

}  // namespace

QueryAst parse(std::string_view sql_text) {
  QueryAst ast = Parser(sql_text).run();
  ast.source = std::string(sql_text);
  detail::bind_columns(ast, nullptr, nullptr);
  return ast;
}

}  // namespace hetfed::sql
