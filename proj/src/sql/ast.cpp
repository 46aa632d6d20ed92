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

#include "hetfed/sql/ast.h"

namespace hetfed::sql {

std::string Literal::value() const {
  if (kind != Kind::string || raw.size() < 2) return raw;
  const char q = raw.front();
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    out += raw[i];
    if (raw[i] == q && i + 1 < raw.size() - 1 && raw[i + 1] == q) ++i;
  }
  return out;
}

Literal Literal::string(const std::string& value) {
  std::string raw = "'";
  for (char c : value) {
    if (c == '\'') raw += '\'';
    raw += c;
  }
  raw += '\'';
  return {Kind::string, raw};
}

Literal Literal::integer(long long v) { return {Kind::integer, std::to_string(v)}; }

bool InList::operator==(const InList& o) const {
  return operand == o.operand && items == o.items && negated == o.negated;
}

bool Function::operator==(const Function& o) const {
  return name == o.name && distinct == o.distinct && star == o.star && args == o.args;
}

bool Join::operator==(const Join& o) const {
  return kind == o.kind && left == o.left && right == o.right && on == o.on;
}

bool Select::operator==(const Select& o) const {
  return distinct == o.distinct && items == o.items && from == o.from && where == o.where &&
         group_by == o.group_by && having == o.having && order_by == o.order_by && limit == o.limit &&
         offset == o.offset;
}

bool Compound::operator==(const Compound& o) const {
  return op == o.op && left == o.left && right == o.right && order_by == o.order_by && limit == o.limit &&
         offset == o.offset;
}

const std::vector<OrderItem>& Query::order_by() const {
  if (const auto* s = select()) return s->order_by;
  return compound()->order_by;
}

namespace {

void collect(const Expr& e, std::vector<const Expr*>& out) {
  if (const auto* b = e.as<Binary>(); b && b->op == BinaryOp::logical_and) {
    collect(*b->lhs, out);
    collect(*b->rhs, out);
    return;
  }
  out.push_back(&e);
}

}  // namespace

std::vector<const Expr*> split_conjuncts(const Expr& e) {
  std::vector<const Expr*> out;
  collect(e, out);
  return out;
}

std::optional<Expr> join_conjuncts(std::vector<Expr> conjuncts) {
  if (conjuncts.empty()) return std::nullopt;
  Expr acc = std::move(conjuncts.front());
  for (std::size_t i = 1; i < conjuncts.size(); ++i) {
    SourceSpan span = acc.span;
    acc = Expr{Binary{BinaryOp::logical_and, std::move(acc), std::move(conjuncts[i])}, span};
  }
  return acc;
}

}  // namespace hetfed::sql
