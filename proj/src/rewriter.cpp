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

#include "hetfed/rewriter.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "hetfed/error.h"
#include "hetfed/text.h"

namespace hetfed {

using sql::Literal;

namespace {

std::optional<long long> parse_integer(const std::string& s) {
  std::string t = text::trim(s);
  if (t.empty()) return std::nullopt;
  std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
  if (i == t.size()) return std::nullopt;
  for (std::size_t k = i; k < t.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(t[k]))) return std::nullopt;
  try {
    return std::stoll(t);
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

std::optional<double> parse_real(const std::string& s) {
  std::string t = text::trim(s);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  double d = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(d)) return std::nullopt;
  if (t.find_first_of("xX") != std::string::npos) return std::nullopt;
  return d;
}

std::string real_text(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", d);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

Literal real_literal(double d) {
  std::string s = real_text(d);
  if (s.find_first_of("eE") != std::string::npos) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    s = buf;
  }
  return Literal{Literal::Kind::real, s};
}

std::optional<Literal> integral(double d) {
  if (std::floor(d) != d || std::fabs(d) > 9.0e15) return std::nullopt;
  return Literal::integer(static_cast<long long>(d));
}

}  // namespace

std::optional<Literal> coerce_literal(const Literal& lit, ValueType type) {
  const std::string v = lit.value();
  switch (lit.kind) {
    case Literal::Kind::null:
      return std::nullopt;
    case Literal::Kind::integer:
      if (type == ValueType::text) return Literal::string(std::to_string(std::stoll(v)));
      if (type == ValueType::real) return real_literal(static_cast<double>(std::stoll(v)));
      if (type == ValueType::boolean) {
        long long n = std::stoll(v);
        if (n != 0 && n != 1) return std::nullopt;
      }
      return Literal::integer(std::stoll(v));
    case Literal::Kind::real: {
      auto d = parse_real(v);
      if (!d) return std::nullopt;
      if (type == ValueType::text) return Literal::string(real_text(*d));
      if (type == ValueType::real) return real_literal(*d);
      auto i = integral(*d);
      if (!i) return std::nullopt;
      if (type == ValueType::boolean && i->raw != "0" && i->raw != "1") return std::nullopt;
      return i;
    }
    case Literal::Kind::string:
      if (type == ValueType::text) return Literal::string(v);
      if (auto i = parse_integer(v)) {
        if (type == ValueType::real) return real_literal(static_cast<double>(*i));
        if (type == ValueType::boolean && *i != 0 && *i != 1) return std::nullopt;
        return Literal::integer(*i);
      }
      if (auto d = parse_real(v)) {
        if (type == ValueType::real) return real_literal(*d);
        auto i = integral(*d);
        if (!i || (type == ValueType::boolean && i->raw != "0" && i->raw != "1")) return std::nullopt;
        return i;
      }
      return std::nullopt;
  }
  return std::nullopt;
}

const OccurrenceRewrite* RewrittenQuery::find(int occurrence) const {
  for (const auto& o : occurrences)
    if (o.occurrence == occurrence) return &o;
  return nullptr;
}

BindResult bind_arguments(const std::vector<sql::Predicate>& conjuncts, const std::vector<ApiParam>& params) {
  BindResult out;
  struct Candidate {
    const ApiParam* param;
    Literal value;
    std::vector<std::size_t> sources;
    bool conflict = false;
  };
  std::map<std::string, Candidate> by_param;
  std::vector<std::string> order;
  std::vector<bool> taken(conjuncts.size(), false);

  for (std::size_t i = 0; i < conjuncts.size(); ++i) {
    const auto& p = conjuncts[i];
    if (p.op != sql::PredicateOp::eq || p.negated || !p.literal || p.literal->kind == Literal::Kind::null) continue;
    const ApiParam* param = nullptr;
    for (const auto& ap : params)
      if (text::iequals(ap.name, p.column.name)) param = &ap;
    if (!param) continue;
    auto value = coerce_literal(*p.literal, param->value_type);
    if (!value) {
      out.mismatched.push_back(p);
      continue;
    }
    auto key = text::lower(param->name);
    auto it = by_param.find(key);
    if (it == by_param.end()) {
      by_param.emplace(key, Candidate{param, *value, {i}});
      order.push_back(key);
    } else {
      if (!(it->second.value == *value)) it->second.conflict = true;
      it->second.sources.push_back(i);
    }
  }
  for (const auto& key : order) {
    const auto& c = by_param.at(key);
    if (c.conflict) continue;
    out.pushed.push_back({c.param->name, c.value, conjuncts[c.sources.front()].conjunct.span});
    for (auto s : c.sources) taken[s] = true;
  }
  for (std::size_t i = 0; i < conjuncts.size(); ++i)
    if (!taken[i]) out.residual.push_back(conjuncts[i]);
  return out;
}

BindResult bind_arguments(const std::vector<sql::Predicate>& conjuncts, const ApiMapping& mapping) {
  return bind_arguments(conjuncts, mapping.input_params);
}

namespace {

struct Plan {
  const ViewTable* table = nullptr;
  OccurrenceRewrite info;
  std::set<std::size_t> removed;  // conjunct indices of the enclosing WHERE
};

void from_occurrences(const sql::TableRef& t, bool nullable, std::vector<std::pair<int, bool>>& out) {
  if (const auto* n = t.as<sql::TableName>()) {
    out.emplace_back(n->occurrence, nullable);
  } else if (const auto* f = t.as<sql::TableFunction>()) {
    out.emplace_back(f->occurrence, nullable);
  } else if (const auto* d = t.as<sql::DerivedTable>()) {
    out.emplace_back(d->occurrence, nullable);
  } else {
    const auto& j = *t.as<sql::Join>();
    from_occurrences(*j.left, nullable, out);
    from_occurrences(*j.right, nullable || j.kind == sql::JoinKind::left, out);
  }
}

class Applier {
 public:
  explicit Applier(std::map<int, Plan>& plans) : plans_(plans) {}

  void query(sql::Query& q) {
    if (auto* c = q.compound()) {
      query(*c->left);
      query(*c->right);
      for (auto& o : c->order_by) expr(o.expr);
      return;
    }
    select(*q.select());
  }

 private:
  void expr(sql::Expr& e) {
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, sql::Unary>) {
            expr(*n.operand);
          } else if constexpr (std::is_same_v<T, sql::Binary>) {
            expr(*n.lhs);
            expr(*n.rhs);
          } else if constexpr (std::is_same_v<T, sql::Between>) {
            expr(*n.operand);
            expr(*n.low);
            expr(*n.high);
          } else if constexpr (std::is_same_v<T, sql::InList>) {
            expr(*n.operand);
            for (auto& i : n.items) expr(i);
          } else if constexpr (std::is_same_v<T, sql::InQuery>) {
            expr(*n.operand);
            query(*n.query);
          } else if constexpr (std::is_same_v<T, sql::IsNull>) {
            expr(*n.operand);
          } else if constexpr (std::is_same_v<T, sql::Function>) {
            for (auto& a : n.args) expr(a);
          } else if constexpr (std::is_same_v<T, sql::ScalarQuery> || std::is_same_v<T, sql::Exists>) {
            query(*n.query);
          }
        },
        e.node);
  }

  void table(sql::TableRef& t, std::set<std::size_t>& removed) {
    if (auto* j = t.as<sql::Join>()) {
      table(*j->left, removed);
      table(*j->right, removed);
      if (j->on) expr(*j->on);
      return;
    }
    if (auto* d = t.as<sql::DerivedTable>()) {
      query(*d->query);
      return;
    }
    int occ = 0;
    sql::SourceSpan span;
    if (const auto* n = t.as<sql::TableName>()) {
      occ = n->occurrence;
      span = n->span;
    } else {
      occ = t.as<sql::TableFunction>()->occurrence;
      span = t.as<sql::TableFunction>()->span;
    }
    auto it = plans_.find(occ);
    if (it == plans_.end()) return;
    const Plan& p = it->second;
    removed.insert(p.removed.begin(), p.removed.end());
    sql::TableFunction fn;
    fn.name = p.info.udf_name;
    fn.occurrence = occ;
    fn.span = span;
    fn.alias = p.info.exposed;
    for (const auto& b : p.info.pushed) fn.args.push_back({b.param, b.value, b.origin});
    t.node = std::move(fn);
  }

  void select(sql::Select& s) {
    std::set<std::size_t> removed;
    if (s.from) table(*s.from, removed);
    for (auto& i : s.items) expr(i.expr);
    if (s.where) {
      auto parts = sql::split_conjuncts(*s.where);
      std::vector<sql::Expr> kept;
      for (std::size_t i = 0; i < parts.size(); ++i)
        if (!removed.count(i)) kept.push_back(*parts[i]);
      s.where = sql::join_conjuncts(std::move(kept));
      if (s.where) expr(*s.where);
    }
    for (auto& g : s.group_by) expr(g);
    if (s.having) expr(*s.having);
    for (auto& o : s.order_by) expr(o.expr);
  }

  std::map<int, Plan>& plans_;
};

struct Info {
  std::map<int, bool> nullable;
  std::map<int, const sql::TableFunction*> functions;
};

void collect_functions(const sql::TableRef& t, Info& info) {
  if (const auto* f = t.as<sql::TableFunction>()) {
    info.functions[f->occurrence] = f;
  } else if (const auto* j = t.as<sql::Join>()) {
    collect_functions(*j->left, info);
    collect_functions(*j->right, info);
  }
}

void collect_nullable(const sql::Query& q, Info& nullable);

void collect_nullable_expr(const sql::Expr& e, Info& nullable) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, sql::Unary>) {
          collect_nullable_expr(*n.operand, nullable);
        } else if constexpr (std::is_same_v<T, sql::Binary>) {
          collect_nullable_expr(*n.lhs, nullable);
          collect_nullable_expr(*n.rhs, nullable);
        } else if constexpr (std::is_same_v<T, sql::Between>) {
          collect_nullable_expr(*n.operand, nullable);
          collect_nullable_expr(*n.low, nullable);
          collect_nullable_expr(*n.high, nullable);
        } else if constexpr (std::is_same_v<T, sql::InList>) {
          collect_nullable_expr(*n.operand, nullable);
          for (const auto& i : n.items) collect_nullable_expr(i, nullable);
        } else if constexpr (std::is_same_v<T, sql::InQuery>) {
          collect_nullable_expr(*n.operand, nullable);
          collect_nullable(*n.query, nullable);
        } else if constexpr (std::is_same_v<T, sql::IsNull>) {
          collect_nullable_expr(*n.operand, nullable);
        } else if constexpr (std::is_same_v<T, sql::Function>) {
          for (const auto& a : n.args) collect_nullable_expr(a, nullable);
        } else if constexpr (std::is_same_v<T, sql::ScalarQuery> || std::is_same_v<T, sql::Exists>) {
          collect_nullable(*n.query, nullable);
        }
      },
      e.node);
}

void collect_nullable_from(const sql::TableRef& t, Info& nullable) {
  if (const auto* d = t.as<sql::DerivedTable>()) {
    collect_nullable(*d->query, nullable);
  } else if (const auto* j = t.as<sql::Join>()) {
    collect_nullable_from(*j->left, nullable);
    collect_nullable_from(*j->right, nullable);
    if (j->on) collect_nullable_expr(*j->on, nullable);
  }
}

void collect_nullable(const sql::Query& q, Info& nullable) {
  if (const auto* c = q.compound()) {
    collect_nullable(*c->left, nullable);
    collect_nullable(*c->right, nullable);
    for (const auto& o : c->order_by) collect_nullable_expr(o.expr, nullable);
    return;
  }
  const auto& s = *q.select();
  if (s.from) {
    std::vector<std::pair<int, bool>> occ;
    from_occurrences(*s.from, false, occ);
    for (auto [o, n] : occ) nullable.nullable[o] = n;
    collect_functions(*s.from, nullable);
    collect_nullable_from(*s.from, nullable);
  }
  for (const auto& i : s.items) collect_nullable_expr(i.expr, nullable);
  if (s.where) collect_nullable_expr(*s.where, nullable);
  for (const auto& g : s.group_by) collect_nullable_expr(g, nullable);
  if (s.having) collect_nullable_expr(*s.having, nullable);
  for (const auto& o : s.order_by) collect_nullable_expr(o.expr, nullable);
}

std::string describe(const sql::ResolveIssue& i) {
  using K = sql::ResolveIssue::Kind;
  switch (i.kind) {
    case K::unknown_table:
      return "unknown table '" + i.subject + "'";
    case K::unknown_function:
      return "unknown table function '" + i.subject + "'";
    case K::unknown_param:
      return "unknown parameter '" + i.subject + "' for '" + i.context + "'";
    case K::unknown_qualifier:
      return "unknown table or alias '" + i.subject + "'";
    case K::unknown_column:
      return "unknown column '" + i.subject + "' in " + i.context;
    case K::ambiguous_column:
      return "ambiguous column '" + i.subject + "'";
    case K::duplicate_alias:
      return "duplicate table alias '" + i.subject + "'";
  }
  return "invalid query";
}

std::string at(const sql::SourceSpan& s) {
  return " at line " + std::to_string(s.line) + ", column " + std::to_string(s.column);
}

}  // namespace

RewrittenQuery rewrite(const sql::QueryAst& input, const TableView& view) {
  RewrittenQuery out;
  sql::QueryAst ast = input;
  auto issues = sql::resolve(ast, view);
  if (!issues.empty()) throw RewriteError(describe(issues.front()) + at(issues.front().span));

  auto refs = sql::table_refs(ast);
  Info info;
  collect_nullable(ast.root, info);

  std::map<int, Plan> plans;
  for (const auto& ref : refs) {
    if (ref.kind == sql::OccurrenceKind::derived) continue;
    const ViewTable* vt = nullptr;
    if (ref.kind == sql::OccurrenceKind::table) {
      vt = view.find_table(ref.table_name);
      if (!vt || !vt->is_virtual()) vt = view.find_udf(ref.table_name);
    } else {
      vt = view.find_udf(ref.table_name);
    }
    if (!vt || !vt->is_virtual()) continue;

    Plan p;
    p.table = vt;
    p.info.occurrence = ref.occurrence;
    p.info.table = vt->name;
    p.info.udf_name = *vt->udf_name;
    p.info.exposed = ref.alias ? *ref.alias : ref.table_name;
    p.info.span = ref.span;

    std::vector<ApiParam> free_params = vt->params;
    if (auto f = info.functions.find(ref.occurrence); f != info.functions.end()) {
      for (const auto& a : f->second->args) {
        const ApiParam* param = vt->find_param(a.param);
        auto value = param ? coerce_literal(a.value, param->value_type) : std::nullopt;
        if (!value)
          throw RewriteError("literal " + a.value.raw + " cannot be bound to parameter '" + a.param + "' of '" +
                             *vt->udf_name + "'" + at(a.span));
        p.info.pushed.push_back({param->name, *value, a.span});
        std::erase_if(free_params, [&](const ApiParam& x) { return x.name == param->name; });
      }
    }

    auto predicates = sql::conjuncts_for(ast, ref);
    if (info.nullable[ref.occurrence]) {
      p.info.residual = predicates;
    } else {
      auto bound = bind_arguments(predicates, free_params);
      if (!bound.mismatched.empty()) {
        const auto& m = bound.mismatched.front();
        throw RewriteError("literal " + m.literal->raw + " cannot be bound to parameter '" + m.column.name +
                           "' of '" + *vt->udf_name + "'" + at(m.conjunct.span));
      }
      p.info.pushed.insert(p.info.pushed.end(), bound.pushed.begin(), bound.pushed.end());
      p.info.residual = bound.residual;
      for (const auto& pred : predicates) {
        bool kept = false;
        for (const auto& r : bound.residual)
          if (r.conjunct_index == pred.conjunct_index) kept = true;
        if (!kept) p.removed.insert(pred.conjunct_index);
      }
    }
    plans.emplace(ref.occurrence, std::move(p));
  }
  if (plans.empty()) {
    out.ast = input;
    return out;
  }
  Applier(plans).query(ast.root);
  out.ast = std::move(ast);
  for (auto& [occ, p] : plans) out.occurrences.push_back(std::move(p.info));
  return out;
}

}  // namespace hetfed
