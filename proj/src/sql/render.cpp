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

#include "hetfed/sql/render.h"

#include <cctype>
#include <set>

#include "hetfed/text.h"

namespace hetfed::sql {

bool is_keyword(std::string_view word) {
  static const std::set<std::string> kws = {
      "ALL",    "AND",    "AS",      "ASC",       "BETWEEN", "BY",     "CASE",   "CAST",    "COLLATE",
      "CROSS",  "DESC",   "DISTINCT", "ELSE",     "END",     "ESCAPE", "EXCEPT", "EXISTS",  "FROM",
      "FULL",   "GLOB",   "GROUP",   "HAVING",    "IN",      "INDEXED", "INNER", "INTERSECT", "IS",
      "ISNULL", "JOIN",   "LEFT",    "LIKE",      "LIMIT",   "NATURAL", "NOT",   "NOTNULL", "NULL",
      "OFFSET", "ON",     "OR",      "ORDER",     "OUTER",   "RIGHT",  "SELECT", "THEN",    "UNION",
      "USING",  "VALUES", "WHEN",    "WHERE",     "WINDOW",  "WITH"};
  return kws.count(text::upper(word)) > 0;
}

std::string render_identifier(const std::string& name) {
  bool plain = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '$') plain = false;
  if (plain && !is_keyword(name)) return name;
  std::string out = "`";
  for (char c : name) {
    if (c == '`') out += '`';
    out += c;
  }
  return out + "`";
}

namespace {

int precedence(const Expr& e) {
  if (const auto* u = e.as<Unary>()) return u->op == UnaryOp::logical_not ? 3 : 9;
  if (const auto* b = e.as<Binary>()) {
    switch (b->op) {
      case BinaryOp::logical_or:
        return 1;
      case BinaryOp::logical_and:
        return 2;
      case BinaryOp::eq:
      case BinaryOp::ne:
      case BinaryOp::like:
      case BinaryOp::not_like:
        return 4;
      case BinaryOp::lt:
      case BinaryOp::le:
      case BinaryOp::gt:
      case BinaryOp::ge:
        return 5;
      case BinaryOp::add:
      case BinaryOp::sub:
        return 6;
      case BinaryOp::mul:
      case BinaryOp::div:
      case BinaryOp::mod:
        return 7;
      case BinaryOp::concat:
        return 8;
    }
  }
  if (e.as<Between>() || e.as<InList>() || e.as<InQuery>() || e.as<IsNull>()) return 4;
  return 10;
}

const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::logical_or:
      return "OR";
    case BinaryOp::logical_and:
      return "AND";
    case BinaryOp::eq:
      return "=";
    case BinaryOp::ne:
      return "!=";
    case BinaryOp::lt:
      return "<";
    case BinaryOp::le:
      return "<=";
    case BinaryOp::gt:
      return ">";
    case BinaryOp::ge:
      return ">=";
    case BinaryOp::add:
      return "+";
    case BinaryOp::sub:
      return "-";
    case BinaryOp::mul:
      return "*";
    case BinaryOp::div:
      return "/";
    case BinaryOp::mod:
      return "%";
    case BinaryOp::concat:
      return "||";
    case BinaryOp::like:
      return "LIKE";
    case BinaryOp::not_like:
      return "NOT LIKE";
  }
  return "?";
}

class Renderer {
 public:
  explicit Renderer(Dialect d) : d_(d) {}

  std::string literal(const Literal& l) const {
    if (d_ == Dialect::engine && l.double_quoted()) return text::sql_quote(l.value());
    return l.raw;
  }

  std::string expr(const Expr& e, int min_prec = 0) const {
    std::string s = expr_inner(e);
    return precedence(e) < min_prec ? "(" + s + ")" : s;
  }

  std::string expr_inner(const Expr& e) const {
    if (const auto* l = e.as<Literal>()) return literal(*l);
    if (const auto* c = e.as<ColumnRef>()) {
      std::string out;
      if (!c->qualifier.empty()) out = render_identifier(c->qualifier) + ".";
      return out + render_identifier(c->name);
    }
    if (const auto* s = e.as<Star>()) return s->qualifier.empty() ? "*" : render_identifier(s->qualifier) + ".*";
    if (const auto* u = e.as<Unary>()) {
      if (u->op == UnaryOp::logical_not) return "NOT " + expr(*u->operand, 3);
      std::string inner = expr(*u->operand, 9);
      if (!inner.empty() && (inner[0] == '-' || inner[0] == '+')) inner = "(" + inner + ")";
      return (u->op == UnaryOp::negate ? "-" : "+") + inner;
    }
    if (const auto* b = e.as<Binary>()) {
      const int p = precedence(e);
      return expr(*b->lhs, p) + " " + op_text(b->op) + " " + expr(*b->rhs, p + 1);
    }
    if (const auto* b = e.as<Between>()) {
      return expr(*b->operand, 4) + (b->negated ? " NOT BETWEEN " : " BETWEEN ") + expr(*b->low, 5) + " AND " +
             expr(*b->high, 5);
    }
    if (const auto* in = e.as<InList>()) {
      std::string out = expr(*in->operand, 4) + (in->negated ? " NOT IN (" : " IN (");
      for (std::size_t i = 0; i < in->items.size(); ++i) {
        if (i) out += ", ";
        out += expr(in->items[i]);
      }
      return out + ")";
    }
    if (const auto* in = e.as<InQuery>())
      return expr(*in->operand, 4) + (in->negated ? " NOT IN (" : " IN (") + query(*in->query) + ")";
    if (const auto* n = e.as<IsNull>()) return expr(*n->operand, 4) + (n->negated ? " IS NOT NULL" : " IS NULL");
    if (const auto* f = e.as<Function>()) {
      std::string out = f->name + "(";
      if (f->star) return out + "*)";
      if (f->distinct) out += "DISTINCT ";
      for (std::size_t i = 0; i < f->args.size(); ++i) {
        if (i) out += ", ";
        out += expr(f->args[i]);
      }
      return out + ")";
    }
    if (const auto* q = e.as<ScalarQuery>()) return "(" + query(*q->query) + ")";
    if (const auto* x = e.as<Exists>()) return "EXISTS (" + query(*x->query) + ")";
    return "?";
  }

  std::string alias(const std::optional<std::string>& a) const {
    return a ? " AS " + render_identifier(*a) : std::string();
  }

  std::string table(const TableRef& t) const {
    if (const auto* n = t.as<TableName>()) return render_identifier(n->name) + alias(n->alias);
    if (const auto* f = t.as<TableFunction>()) {
      std::string out = render_identifier(f->name) + "(";
      if (d_ == Dialect::engine) {
        out += std::to_string(f->occurrence);
        for (const auto& a : f->args) out += ", " + text::sql_quote(a.param) + ", " + literal(a.value);
        return out + ") AS " + render_identifier(f->exposed());
      }
      for (std::size_t i = 0; i < f->args.size(); ++i) {
        if (i) out += ", ";
        out += render_identifier(f->args[i].param) + " := " + literal(f->args[i].value);
      }
      return out + ")" + alias(f->alias);
    }
    if (const auto* d = t.as<DerivedTable>()) return "(" + query(*d->query) + ")" + alias(d->alias);
    const auto& j = *t.as<Join>();
    std::string sep;
    switch (j.kind) {
      case JoinKind::comma:
        sep = ", ";
        break;
      case JoinKind::inner:
        sep = " JOIN ";
        break;
      case JoinKind::left:
        sep = " LEFT JOIN ";
        break;
      case JoinKind::cross:
        sep = " CROSS JOIN ";
        break;
    }
    std::string out = table(*j.left) + sep + table(*j.right);
    if (j.on) out += " ON " + expr(*j.on);
    return out;
  }

  std::string tail(const std::vector<OrderItem>& order, const std::optional<Expr>& limit,
                   const std::optional<Expr>& offset) const {
    std::string out;
    if (!order.empty()) {
      out += " ORDER BY ";
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) out += ", ";
        out += expr(order[i].expr);
        if (order[i].dir == SortDir::asc) out += " ASC";
        if (order[i].dir == SortDir::desc) out += " DESC";
      }
    }
    if (limit) out += " LIMIT " + expr(*limit);
    if (offset) out += " OFFSET " + expr(*offset);
    return out;
  }

  std::string select(const Select& s) const {
    std::string out = s.distinct ? "SELECT DISTINCT " : "SELECT ";
    for (std::size_t i = 0; i < s.items.size(); ++i) {
      if (i) out += ", ";
      out += expr(s.items[i].expr) + alias(s.items[i].alias);
    }
    if (s.from) out += " FROM " + table(*s.from);
    if (s.where) out += " WHERE " + expr(*s.where);
    if (!s.group_by.empty()) {
      out += " GROUP BY ";
      for (std::size_t i = 0; i < s.group_by.size(); ++i) {
        if (i) out += ", ";
        out += expr(s.group_by[i]);
      }
    }
    if (s.having) out += " HAVING " + expr(*s.having);
    return out + tail(s.order_by, s.limit, s.offset);
  }

  std::string query(const Query& q) const {
    if (const auto* s = q.select()) return select(*s);
    const auto& c = *q.compound();
    const char* op = c.op == SetOp::union_distinct ? " UNION "
                     : c.op == SetOp::union_all    ? " UNION ALL "
                     : c.op == SetOp::intersect    ? " INTERSECT "
                                                   : " EXCEPT ";
    return query(*c.left) + op + query(*c.right) + tail(c.order_by, c.limit, c.offset);
  }

 private:
  Dialect d_;
};

}  // namespace

std::string render(const QueryAst& ast, Dialect dialect) { return Renderer(dialect).query(ast.root); }
std::string render(const Query& q, Dialect dialect) { return Renderer(dialect).query(q); }
std::string render(const Expr& e, Dialect dialect) { return Renderer(dialect).expr(e); }
std::string render(const TableRef& t, Dialect dialect) { return Renderer(dialect).table(t); }

}  // namespace hetfed::sql
