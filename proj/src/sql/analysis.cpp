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

#include "hetfed/sql/analysis.h"

#include <algorithm>
#include <functional>
#include <set>

#include "hetfed/error.h"
#include "hetfed/sql/render.h"
#include "hetfed/text.h"
#include "resolve_internal.h"

namespace hetfed::sql {

namespace {

// Calls `fn` on every subquery directly nested in `e` (not recursing into
// the subqueries themselves).
template <class ExprT, class Fn>
void for_each_subquery(ExprT& e, Fn&& fn) {
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Unary>) {
          for_each_subquery(*n.operand, fn);
        } else if constexpr (std::is_same_v<T, Binary>) {
          for_each_subquery(*n.lhs, fn);
          for_each_subquery(*n.rhs, fn);
        } else if constexpr (std::is_same_v<T, Between>) {
          for_each_subquery(*n.operand, fn);
          for_each_subquery(*n.low, fn);
          for_each_subquery(*n.high, fn);
        } else if constexpr (std::is_same_v<T, InList>) {
          for_each_subquery(*n.operand, fn);
          for (auto& i : n.items) for_each_subquery(i, fn);
        } else if constexpr (std::is_same_v<T, InQuery>) {
          for_each_subquery(*n.operand, fn);
          fn(*n.query);
        } else if constexpr (std::is_same_v<T, IsNull>) {
          for_each_subquery(*n.operand, fn);
        } else if constexpr (std::is_same_v<T, Function>) {
          for (auto& a : n.args) for_each_subquery(a, fn);
        } else if constexpr (std::is_same_v<T, ScalarQuery> || std::is_same_v<T, Exists>) {
          fn(*n.query);
        }
      },
      e.node);
}

struct Entry {
  std::string exposed;
  int occurrence = 0;
  bool known = false;
  std::string table;
  std::vector<std::string> columns;

  bool has_column(const std::string& c) const {
    return std::any_of(columns.begin(), columns.end(), [&](const std::string& x) { return text::iequals(x, c); });
  }
};

struct Scope {
  std::vector<Entry> entries;
  const Scope* parent = nullptr;
  std::vector<std::string> aliases;
  int depth = 0;

  const Entry* find(const std::string& exposed) const {
    for (const auto& e : entries)
      if (text::iequals(e.exposed, exposed)) return &e;
    return nullptr;
  }
  bool has_alias(const std::string& name) const {
    return std::any_of(aliases.begin(), aliases.end(), [&](const std::string& a) { return text::iequals(a, name); });
  }
};

std::vector<std::string> column_names(const ViewTable& t) {
  std::vector<std::string> out;
  for (const auto& c : t.columns) out.push_back(c.name);
  return out;
}

std::vector<std::string> star_columns(const Scope& scope, const std::string& qualifier) {
  std::vector<std::string> out;
  for (const auto& e : scope.entries) {
    if (!qualifier.empty() && !text::iequals(e.exposed, qualifier)) continue;
    out.insert(out.end(), e.columns.begin(), e.columns.end());
  }
  return out;
}

class Binder {
 public:
  Binder(const TableView* view, std::vector<ResolveIssue>* issues) : view_(view), issues_(issues) {}

  // Returns the output column names of `q`.
  std::vector<std::string> query(Query& q, const Scope* parent, int depth) {
    if (auto* s = q.select()) return select(*s, parent, depth);
    auto& c = *q.compound();
    auto names = query(*c.left, parent, depth);
    query(*c.right, parent, depth);
    Scope result;
    result.parent = parent;
    result.depth = depth;
    result.aliases = names;
    for (auto& o : c.order_by) compound_order(o.expr, result, names);
    if (c.limit) expr(*c.limit, result, false);
    if (c.offset) expr(*c.offset, result, false);
    return names;
  }

 private:
  void issue(ResolveIssue::Kind kind, std::string subject, std::string context, std::vector<std::string> valid,
             SourceSpan span, int depth) {
    if (!issues_) return;
    issues_->push_back({kind, std::move(subject), std::move(context), std::move(valid), span, depth});
  }

  std::vector<std::string> table_names() const {
    return view_ ? view_->table_names() : std::vector<std::string>{};
  }

  std::vector<std::string> udf_names() const {
    std::vector<std::string> out;
    if (view_)
      for (const auto& t : view_->tables)
        if (t.udf_name) out.push_back(*t.udf_name);
    return out;
  }

  void add_entry(Scope& scope, Entry e, SourceSpan span) {
    if (scope.find(e.exposed))
      issue(ResolveIssue::Kind::duplicate_alias, e.exposed, "", {}, span, scope.depth);
    scope.entries.push_back(std::move(e));
  }

  void collect_from(TableRef& t, Scope& scope, const Scope* parent, std::vector<Expr*>& on_exprs) {
    if (auto* n = t.as<TableName>()) {
      Entry e{n->exposed(), n->occurrence, false, n->name, {}};
      if (view_) {
        const ViewTable* vt = view_->find_table(n->name);
        if (!vt) vt = view_->find_udf(n->name);
        if (vt) {
          e.known = true;
          e.table = vt->name;
          e.columns = column_names(*vt);
        } else {
          issue(ResolveIssue::Kind::unknown_table, n->name, "", table_names(), n->span, scope.depth);
        }
      }
      add_entry(scope, std::move(e), n->span);
      return;
    }
    if (auto* f = t.as<TableFunction>()) {
      Entry e{f->exposed(), f->occurrence, false, f->name, {}};
      if (view_) {
        if (const ViewTable* vt = view_->find_udf(f->name)) {
          e.known = true;
          e.table = vt->name;
          e.columns = column_names(*vt);
          for (const auto& a : f->args) {
            if (vt->find_param(a.param)) continue;
            std::vector<std::string> params;
            for (const auto& p : vt->params) params.push_back(p.name);
            issue(ResolveIssue::Kind::unknown_param, a.param, *vt->udf_name, params, a.span, scope.depth);
          }
        } else {
          issue(ResolveIssue::Kind::unknown_function, f->name, "", udf_names(), f->span, scope.depth);
        }
      }
      add_entry(scope, std::move(e), f->span);
      return;
    }
    if (auto* d = t.as<DerivedTable>()) {
      Entry e;
      e.exposed = d->alias ? *d->alias : "";
      e.occurrence = d->occurrence;
      e.columns = query(*d->query, parent, scope.depth + 1);
      e.known = view_ != nullptr;
      e.table = e.exposed.empty() ? "subquery" : e.exposed;
      if (e.exposed.empty()) {
        scope.entries.push_back(std::move(e));
      } else {
        add_entry(scope, std::move(e), d->span);
      }
      return;
    }
    auto& j = *t.as<Join>();
    collect_from(*j.left, scope, parent, on_exprs);
    collect_from(*j.right, scope, parent, on_exprs);
    if (j.on) on_exprs.push_back(&*j.on);
  }

  std::vector<std::string> select(Select& s, const Scope* parent, int depth) {
    Scope scope;
    scope.parent = parent;
    scope.depth = depth;
    std::vector<Expr*> on_exprs;
    if (s.from) collect_from(*s.from, scope, parent, on_exprs);
    for (const auto& item : s.items)
      if (item.alias) scope.aliases.push_back(*item.alias);
    for (auto* on : on_exprs) expr(*on, scope, false);
    for (auto& item : s.items) expr(item.expr, scope, false);
    if (s.where) expr(*s.where, scope, false);
    for (auto& g : s.group_by) expr(g, scope, false);
    if (s.having) expr(*s.having, scope, false);
    for (auto& o : s.order_by) expr(o.expr, scope, true);
    if (s.limit) expr(*s.limit, scope, false);
    if (s.offset) expr(*s.offset, scope, false);

    std::vector<std::string> names;
    for (const auto& item : s.items) {
      if (item.alias) {
        names.push_back(*item.alias);
      } else if (const auto* star = item.expr.as<Star>()) {
        auto cols = star_columns(scope, star->qualifier);
        names.insert(names.end(), cols.begin(), cols.end());
      } else if (const auto* c = item.expr.as<ColumnRef>()) {
        names.push_back(c->name);
      } else {
        names.push_back(render(item.expr));
      }
    }
    return names;
  }

  void compound_order(Expr& e, const Scope& result, const std::vector<std::string>& names) {
    if (auto* c = e.as<ColumnRef>()) {
      bool found = std::any_of(names.begin(), names.end(), [&](const std::string& n) { return text::iequals(n, c->name); });
      c->binding = found ? kSelectAlias : kUnresolved;
      if (!found && view_)
        issue(ResolveIssue::Kind::unknown_column, c->name, "compound result", names, c->span, result.depth);
      return;
    }
    expr(e, result, true);
  }

  void expr(Expr& e, const Scope& scope, bool order_ctx) {
    if (auto* c = e.as<ColumnRef>()) {
      column(*c, scope, order_ctx);
      return;
    }
    if (auto* s = e.as<Star>()) {
      if (!s->qualifier.empty() && !scope.find(s->qualifier) && view_)
        issue(ResolveIssue::Kind::unknown_qualifier, s->qualifier, "", exposed_names(scope), e.span, scope.depth);
      return;
    }
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Unary>) {
            expr(*n.operand, scope, order_ctx);
          } else if constexpr (std::is_same_v<T, Binary>) {
            expr(*n.lhs, scope, order_ctx);
            expr(*n.rhs, scope, order_ctx);
          } else if constexpr (std::is_same_v<T, Between>) {
            expr(*n.operand, scope, order_ctx);
            expr(*n.low, scope, order_ctx);
            expr(*n.high, scope, order_ctx);
          } else if constexpr (std::is_same_v<T, InList>) {
            expr(*n.operand, scope, order_ctx);
            for (auto& i : n.items) expr(i, scope, order_ctx);
          } else if constexpr (std::is_same_v<T, InQuery>) {
            expr(*n.operand, scope, order_ctx);
            query(*n.query, &scope, scope.depth + 1);
          } else if constexpr (std::is_same_v<T, IsNull>) {
            expr(*n.operand, scope, order_ctx);
          } else if constexpr (std::is_same_v<T, Function>) {
            for (auto& a : n.args) expr(a, scope, order_ctx);
          } else if constexpr (std::is_same_v<T, ScalarQuery> || std::is_same_v<T, Exists>) {
            query(*n.query, &scope, scope.depth + 1);
          }
        },
        e.node);
  }

  static std::vector<std::string> exposed_names(const Scope& scope) {
    std::vector<std::string> out;
    for (const Scope* s = &scope; s; s = s->parent)
      for (const auto& e : s->entries)
        if (!e.exposed.empty()) out.push_back(e.exposed);
    return out;
  }

  void column(ColumnRef& c, const Scope& scope, bool order_ctx) {
    c.binding = kUnresolved;
    if (!c.qualifier.empty()) {
      for (const Scope* s = &scope; s; s = s->parent) {
        const Entry* e = s->find(c.qualifier);
        if (!e) continue;
        c.binding = e->occurrence;
        if (e->known && !e->has_column(c.name)) {
          c.binding = kUnresolved;
          issue(ResolveIssue::Kind::unknown_column, c.name, e->table, e->columns, c.span, scope.depth);
        }
        return;
      }
      if (view_)
        issue(ResolveIssue::Kind::unknown_qualifier, c.qualifier, "", exposed_names(scope), c.qualifier_span,
              scope.depth);
      return;
    }
    if (order_ctx && scope.has_alias(c.name)) {
      c.binding = kSelectAlias;
      return;
    }
    if (!view_) {
      if (scope.entries.size() == 1) c.binding = scope.entries.front().occurrence;
      return;
    }
    for (const Scope* s = &scope; s; s = s->parent) {
      std::vector<const Entry*> hits;
      bool unknown = false;
      for (const auto& e : s->entries) {
        if (!e.known) unknown = true;
        if (e.known && e.has_column(c.name)) hits.push_back(&e);
      }
      if (hits.size() > 1) {
        std::vector<std::string> tables;
        for (const auto* h : hits) tables.push_back(h->exposed);
        issue(ResolveIssue::Kind::ambiguous_column, c.name, text::join(tables, ", "), {}, c.span, scope.depth);
        return;
      }
      if (hits.size() == 1) {
        c.binding = hits.front()->occurrence;
        return;
      }
      if (unknown) return;
      if (s == &scope && scope.has_alias(c.name)) {
        c.binding = kSelectAlias;
        return;
      }
    }
    std::vector<std::string> tables, valid;
    for (const auto& e : scope.entries) {
      tables.push_back(e.table);
      for (const auto& col : e.columns)
        if (std::find(valid.begin(), valid.end(), col) == valid.end()) valid.push_back(col);
    }
    issue(ResolveIssue::Kind::unknown_column, c.name, text::join(tables, ", "), valid, c.span, scope.depth);
  }

  const TableView* view_;
  std::vector<ResolveIssue>* issues_;
};

// ---------------------------------------------------------------------------

class RefCollector {
 public:
  std::vector<TableOccurrence> out;

  void query(const Query& q, const std::string& path) {
    if (const auto* s = q.select()) {
      select(*s, path);
      return;
    }
    const auto& c = *q.compound();
    query(*c.left, path + "/left");
    query(*c.right, path + "/right");
    int k = 0;
    for (const auto& o : c.order_by) nested(o.expr, path, k);
  }

 private:
  void nested(const Expr& e, const std::string& path, int& k) {
    for_each_subquery(e, [&](const Query& q) { query(q, path + "/sub[" + std::to_string(k++) + "]"); });
  }

  void from(const TableRef& t, const std::string& path, int& k) {
    if (const auto* n = t.as<TableName>()) {
      out.push_back({n->name, n->alias, path, n->occurrence, OccurrenceKind::table, n->span});
    } else if (const auto* f = t.as<TableFunction>()) {
      out.push_back({f->name, f->alias, path, f->occurrence, OccurrenceKind::function, f->span});
    } else if (const auto* d = t.as<DerivedTable>()) {
      out.push_back({"", d->alias, path, d->occurrence, OccurrenceKind::derived, d->span});
      query(*d->query, path + "/from[" + std::to_string(k++) + "]");
    } else {
      const auto& j = *t.as<Join>();
      from(*j.left, path, k);
      from(*j.right, path, k);
      if (j.on) nested(*j.on, path, k);
    }
  }

  void select(const Select& s, const std::string& path) {
    int k = 0;
    if (s.from) from(*s.from, path, k);
    for (const auto& i : s.items) nested(i.expr, path, k);
    if (s.where) nested(*s.where, path, k);
    for (const auto& g : s.group_by) nested(g, path, k);
    if (s.having) nested(*s.having, path, k);
    for (const auto& o : s.order_by) nested(o.expr, path, k);
  }
};

bool from_contains(const TableRef& t, int occurrence) {
  if (const auto* n = t.as<TableName>()) return n->occurrence == occurrence;
  if (const auto* f = t.as<TableFunction>()) return f->occurrence == occurrence;
  if (const auto* d = t.as<DerivedTable>()) return d->occurrence == occurrence;
  const auto& j = *t.as<Join>();
  return from_contains(*j.left, occurrence) || from_contains(*j.right, occurrence);
}

const Select* find_select(const Query& q, int occurrence);

const Select* find_in_expr(const Expr& e, int occurrence) {
  const Select* hit = nullptr;
  for_each_subquery(e, [&](const Query& q) {
    if (!hit) hit = find_select(q, occurrence);
  });
  return hit;
}

const Select* find_in_from(const TableRef& t, int occurrence) {
  if (const auto* d = t.as<DerivedTable>()) return find_select(*d->query, occurrence);
  if (const auto* j = t.as<Join>()) {
    if (const auto* s = find_in_from(*j->left, occurrence)) return s;
    if (const auto* s = find_in_from(*j->right, occurrence)) return s;
    if (j->on) return find_in_expr(*j->on, occurrence);
  }
  return nullptr;
}

const Select* find_select(const Query& q, int occurrence) {
  if (const auto* c = q.compound()) {
    if (const auto* s = find_select(*c->left, occurrence)) return s;
    if (const auto* s = find_select(*c->right, occurrence)) return s;
    for (const auto& o : c->order_by)
      if (const auto* s = find_in_expr(o.expr, occurrence)) return s;
    return nullptr;
  }
  const auto& s = *q.select();
  if (s.from && from_contains(*s.from, occurrence)) return &s;
  if (s.from)
    if (const auto* hit = find_in_from(*s.from, occurrence)) return hit;
  std::vector<const Expr*> exprs;
  for (const auto& i : s.items) exprs.push_back(&i.expr);
  if (s.where) exprs.push_back(&*s.where);
  for (const auto& g : s.group_by) exprs.push_back(&g);
  if (s.having) exprs.push_back(&*s.having);
  for (const auto& o : s.order_by) exprs.push_back(&o.expr);
  for (const auto* e : exprs)
    if (const auto* hit = find_in_expr(*e, occurrence)) return hit;
  return nullptr;
}

std::optional<PredicateOp> comparison_op(BinaryOp op) {
  switch (op) {
    case BinaryOp::eq:
      return PredicateOp::eq;
    case BinaryOp::ne:
      return PredicateOp::ne;
    case BinaryOp::lt:
      return PredicateOp::lt;
    case BinaryOp::le:
      return PredicateOp::le;
    case BinaryOp::gt:
      return PredicateOp::gt;
    case BinaryOp::ge:
      return PredicateOp::ge;
    case BinaryOp::like:
    case BinaryOp::not_like:
      return PredicateOp::like;
    default:
      return std::nullopt;
  }
}

PredicateOp flipped(PredicateOp op) {
  switch (op) {
    case PredicateOp::lt:
      return PredicateOp::gt;
    case PredicateOp::le:
      return PredicateOp::ge;
    case PredicateOp::gt:
      return PredicateOp::lt;
    case PredicateOp::ge:
      return PredicateOp::le;
    default:
      return op;
  }
}

std::optional<Literal> as_literal(const Expr& e) {
  if (const auto* l = e.as<Literal>()) return *l;
  if (const auto* u = e.as<Unary>(); u && u->op == UnaryOp::negate) {
    if (const auto* l = u->operand->as<Literal>();
        l && (l->kind == Literal::Kind::integer || l->kind == Literal::Kind::real) && l->raw[0] != '-')
      return Literal{l->kind, "-" + l->raw};
  }
  return std::nullopt;
}

std::optional<Predicate> as_predicate(const Expr& e, int occurrence) {
  auto on_ref = [&](const Expr& x) -> const ColumnRef* {
    const auto* c = x.as<ColumnRef>();
    return c && c->binding == occurrence ? c : nullptr;
  };
  Predicate p;
  p.conjunct = e;
  if (const auto* b = e.as<Binary>()) {
    auto op = comparison_op(b->op);
    if (!op) return std::nullopt;
    p.negated = b->op == BinaryOp::not_like;
    if (const auto* c = on_ref(*b->lhs)) {
      p.column = *c;
      p.op = *op;
      p.literal = as_literal(*b->rhs);
      return p;
    }
    if (*op != PredicateOp::like) {
      if (const auto* c = on_ref(*b->rhs)) {
        p.column = *c;
        p.op = flipped(*op);
        p.literal = as_literal(*b->lhs);
        return p;
      }
    }
    return std::nullopt;
  }
  if (const auto* b = e.as<Between>()) {
    if (const auto* c = on_ref(*b->operand)) {
      p.column = *c;
      p.op = PredicateOp::between;
      p.negated = b->negated;
      return p;
    }
  }
  if (const auto* in = e.as<InList>()) {
    if (const auto* c = on_ref(*in->operand)) {
      p.column = *c;
      p.op = PredicateOp::in;
      p.negated = in->negated;
      return p;
    }
  }
  if (const auto* in = e.as<InQuery>()) {
    if (const auto* c = on_ref(*in->operand)) {
      p.column = *c;
      p.op = PredicateOp::in;
      p.negated = in->negated;
      return p;
    }
  }
  if (const auto* n = e.as<IsNull>()) {
    if (const auto* c = on_ref(*n->operand)) {
      p.column = *c;
      p.op = PredicateOp::is_null;
      p.negated = n->negated;
      return p;
    }
  }
  return std::nullopt;
}

}  // namespace

namespace detail {

void bind_columns(QueryAst& ast, const TableView* view, std::vector<ResolveIssue>* issues) {
  Binder(view, issues).query(ast.root, nullptr, 0);
  if (issues)
    std::stable_sort(issues->begin(), issues->end(), [](const ResolveIssue& a, const ResolveIssue& b) {
      return a.span.offset < b.span.offset;
    });
}

}  // namespace detail

std::vector<TableOccurrence> table_refs(const QueryAst& ast) {
  RefCollector c;
  c.query(ast.root, "root");
  std::sort(c.out.begin(), c.out.end(),
            [](const TableOccurrence& a, const TableOccurrence& b) { return a.occurrence < b.occurrence; });
  return c.out;
}

std::vector<Predicate> conjuncts_for(const QueryAst& ast, const TableOccurrence& ref) {
  std::vector<Predicate> out;
  const Select* s = find_select(ast.root, ref.occurrence);
  if (!s || !s->where) return out;
  const auto conjuncts = split_conjuncts(*s->where);
  for (std::size_t i = 0; i < conjuncts.size(); ++i) {
    if (auto p = as_predicate(*conjuncts[i], ref.occurrence)) {
      p->conjunct_index = i;
      out.push_back(std::move(*p));
    }
  }
  return out;
}

std::vector<ResolveIssue> resolve(QueryAst& ast, const TableView& view) {
  std::vector<ResolveIssue> issues;
  detail::bind_columns(ast, &view, &issues);
  return issues;
}

void resolve_strict(QueryAst& ast, const TableView& view) {
  auto issues = resolve(ast, view);
  if (issues.empty()) return;
  const auto& i = issues.front();
  std::string what;
  switch (i.kind) {
    case ResolveIssue::Kind::unknown_table:
      what = "unknown table '" + i.subject + "'";
      break;
    case ResolveIssue::Kind::unknown_function:
      what = "unknown table function '" + i.subject + "'";
      break;
    case ResolveIssue::Kind::unknown_param:
      what = "unknown parameter '" + i.subject + "' for '" + i.context + "'";
      break;
    case ResolveIssue::Kind::unknown_qualifier:
      what = "unknown table or alias '" + i.subject + "'";
      break;
    case ResolveIssue::Kind::unknown_column:
      what = "unknown column '" + i.subject + "' in " + i.context;
      break;
    case ResolveIssue::Kind::ambiguous_column:
      what = "ambiguous column '" + i.subject + "' (in " + i.context + ")";
      break;
    case ResolveIssue::Kind::duplicate_alias:
      what = "duplicate table alias '" + i.subject + "'";
      break;
  }
  throw ResolveError(what + " at line " + std::to_string(i.span.line) + ", column " + std::to_string(i.span.column));
}

std::vector<std::string> output_names(const Query& q, const TableView* view) {
  QueryAst tmp;
  tmp.root = q;
  Binder b(view, nullptr);
  return b.query(tmp.root, nullptr, 0);
}

}  // namespace hetfed::sql
