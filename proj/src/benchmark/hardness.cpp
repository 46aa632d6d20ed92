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

#include <cstdio>

#include "hetfed/benchmark.h"
#include "hetfed/sql/ast.h"

namespace hetfed {

namespace {

using namespace sql;

// Leaf conditions of an AND/OR tree, plus its connector counts.
struct CondList {
  std::vector<const Expr*> leaves;
  int ands = 0;
  int ors = 0;
};

void flatten(const Expr& e, CondList& out) {
  if (const auto* b = e.as<Binary>()) {
    if (b->op == BinaryOp::logical_and || b->op == BinaryOp::logical_or) {
      (b->op == BinaryOp::logical_and ? out.ands : out.ors)++;
      flatten(*b->lhs, out);
      flatten(*b->rhs, out);
      return;
    }
  }
  out.leaves.push_back(&e);
}

void join_conditions(const TableRef& t, CondList& out, int& units) {
  if (const auto* j = t.as<Join>()) {
    join_conditions(*j->left, out, units);
    join_conditions(*j->right, out, units);
    if (j->on) {
      if (!out.leaves.empty()) out.ands++;
      flatten(*j->on, out);
    }
    return;
  }
  ++units;
}

bool is_like(const Expr& e) {
  const auto* b = e.as<Binary>();
  return b && (b->op == BinaryOp::like || b->op == BinaryOp::not_like);
}

bool is_negated(const Expr& e) {
  if (const auto* b = e.as<Binary>()) return b->op == BinaryOp::not_like;
  if (const auto* i = e.as<InList>()) return i->negated;
  if (const auto* i = e.as<InQuery>()) return i->negated;
  if (const auto* b = e.as<Between>()) return b->negated;
  if (const auto* u = e.as<Unary>()) return u->op == UnaryOp::logical_not;
  return false;
}

int subqueries_in(const Expr& e) {
  auto is_sub = [](const Expr& x) { return x.as<ScalarQuery>() != nullptr; };
  if (e.as<InQuery>()) return 1;
  if (e.as<Exists>()) return 1;
  int n = 0;
  if (const auto* b = e.as<Binary>()) n += is_sub(*b->lhs) + is_sub(*b->rhs);
  if (const auto* b = e.as<Between>()) n += is_sub(*b->low) + is_sub(*b->high);
  return n;
}

bool is_agg(const Expr& e) { return e.as<Function>() != nullptr; }

const Select& leftmost(const Query& q) {
  if (const auto* s = q.select()) return *s;
  return leftmost(*q.compound()->left);
}

}  // namespace

std::string hardness(const QueryAst& ast) {
  const Select& s = leftmost(ast.root);
  CondList from_conds, where, having;
  int units = 0;
  if (s.from) join_conditions(*s.from, from_conds, units);
  if (s.where) flatten(*s.where, where);
  if (s.having) flatten(*s.having, having);

  int c1 = 0;
  if (s.where) ++c1;
  if (!s.group_by.empty()) ++c1;
  if (!s.order_by.empty()) ++c1;
  if (s.limit) ++c1;
  if (units > 0) c1 += units - 1;
  c1 += from_conds.ors + where.ors + having.ors;
  for (const auto* list : {&from_conds, &where, &having})
    for (const auto* leaf : list->leaves) c1 += is_like(*leaf);

  int c2 = ast.root.compound() ? 1 : 0;
  for (const auto* list : {&from_conds, &where, &having})
    for (const auto* leaf : list->leaves) c2 += subqueries_in(*leaf);

  int aggs = 0;
  for (const auto& item : s.items) aggs += is_agg(item.expr);
  for (const auto* leaf : where.leaves) aggs += is_negated(*leaf);
  for (const auto& g : s.group_by) aggs += is_agg(g);
  for (const auto& o : s.order_by) {
    if (const auto* b = o.expr.as<Binary>()) {
      aggs += is_agg(*b->lhs) + is_agg(*b->rhs);
    } else {
      aggs += is_agg(o.expr);
    }
  }
  // Connectors and negated conditions of HAVING both count here.
  aggs += having.ands + having.ors;
  for (const auto* leaf : having.leaves) aggs += is_negated(*leaf);

  int others = 0;
  if (aggs > 1) ++others;
  if (s.items.size() > 1) ++others;
  if (where.leaves.size() > 1) ++others;
  if (s.group_by.size() > 1) ++others;

  if (c1 <= 1 && others == 0 && c2 == 0) return "easy";
  if ((others <= 2 && c1 <= 1 && c2 == 0) || (c1 <= 2 && others < 2 && c2 == 0)) return "medium";
  if ((others > 2 && c1 <= 2 && c2 == 0) || (c1 > 2 && c1 <= 3 && others <= 2 && c2 == 0) ||
      (c1 <= 1 && others == 0 && c2 <= 1))
    return "hard";
  return "extra";
}

}  // namespace hetfed
