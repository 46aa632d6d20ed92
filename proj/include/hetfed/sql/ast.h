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

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hetfed::sql {

// Location of a token or node in the query text. Spans never take part in
// structural equality: two ASTs that differ only in positions compare equal.
struct SourceSpan {
  int offset = 0;
  int length = 0;
  int line = 1;
  int column = 1;

  friend bool operator==(const SourceSpan&, const SourceSpan&) { return true; }
};

// Copyable owning pointer for recursive nodes.
template <class T>
class Box {
 public:
  Box() = default;
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& o) : ptr_(o.ptr_ ? std::make_unique<T>(*o.ptr_) : nullptr) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& o) {
    if (this != &o) ptr_ = o.ptr_ ? std::make_unique<T>(*o.ptr_) : nullptr;
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }
  explicit operator bool() const { return static_cast<bool>(ptr_); }

  friend bool operator==(const Box& a, const Box& b) {
    if (!a.ptr_ || !b.ptr_) return !a.ptr_ && !b.ptr_;
    return *a.ptr_ == *b.ptr_;
  }

 private:
  std::unique_ptr<T> ptr_;
};

struct Query;
struct Expr;

struct Literal {
  enum class Kind { integer, real, string, null };
  Kind kind = Kind::null;
  // Exact source text, including quotes for strings.
  std::string raw;

  // Decoded payload: the unquoted string or the numeric text.
  std::string value() const;
  bool double_quoted() const { return kind == Kind::string && !raw.empty() && raw.front() == '"'; }

  static Literal string(const std::string& value);
  static Literal integer(long long v);

  bool operator==(const Literal&) const = default;
};

inline constexpr int kUnresolved = -1;
inline constexpr int kSelectAlias = -2;

struct ColumnRef {
  std::string qualifier;  // empty when unqualified
  std::string name;
  // Table occurrence the column belongs to, or kSelectAlias / kUnresolved.
  int binding = kUnresolved;
  SourceSpan span;
  SourceSpan qualifier_span;

  bool operator==(const ColumnRef&) const = default;
};

struct Star {
  std::string qualifier;
  bool operator==(const Star&) const = default;
};

enum class UnaryOp { negate, plus, logical_not };

enum class BinaryOp { logical_or, logical_and, eq, ne, lt, le, gt, ge, add, sub, mul, div, mod, concat, like, not_like };

struct Unary {
  UnaryOp op;
  Box<Expr> operand;
  bool operator==(const Unary&) const = default;
};

struct Binary {
  BinaryOp op;
  Box<Expr> lhs;
  Box<Expr> rhs;
  bool operator==(const Binary&) const = default;
};

struct Between {
  Box<Expr> operand;
  Box<Expr> low;
  Box<Expr> high;
  bool negated = false;
  bool operator==(const Between&) const = default;
};

struct InList {
  Box<Expr> operand;
  std::vector<Expr> items;
  bool negated = false;
  bool operator==(const InList&) const;
};

struct InQuery {
  Box<Expr> operand;
  Box<Query> query;
  bool negated = false;
  bool operator==(const InQuery&) const = default;
};

struct IsNull {
  Box<Expr> operand;
  bool negated = false;
  bool operator==(const IsNull&) const = default;
};

// Aggregate call: count, sum, avg, min or max.
struct Function {
  std::string name;  // lowercase
  bool distinct = false;
  bool star = false;  // count(*)
  std::vector<Expr> args;
  bool operator==(const Function&) const;
};

struct ScalarQuery {
  Box<Query> query;
  bool operator==(const ScalarQuery&) const = default;
};

struct Exists {
  Box<Query> query;
  bool operator==(const Exists&) const = default;
};

struct Expr {
  std::variant<Literal, ColumnRef, Star, Unary, Binary, Between, InList, InQuery, IsNull, Function, ScalarQuery, Exists>
      node;
  SourceSpan span;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <class T>
  T* as() {
    return std::get_if<T>(&node);
  }

  bool operator==(const Expr&) const = default;
};

// `name := literal` argument of a table-function term.
struct NamedArg {
  std::string param;
  Literal value;
  SourceSpan span;
  bool operator==(const NamedArg&) const = default;
};

struct TableName {
  std::string name;
  std::optional<std::string> alias;
  int occurrence = 0;
  SourceSpan span;

  const std::string& exposed() const { return alias ? *alias : name; }
  bool operator==(const TableName&) const = default;
};

// An API-invoking table function, e.g. api_museum(Name := 'Plaza Museum').
struct TableFunction {
  std::string name;
  std::vector<NamedArg> args;
  std::optional<std::string> alias;
  int occurrence = 0;
  SourceSpan span;

  const std::string& exposed() const { return alias ? *alias : name; }
  bool operator==(const TableFunction&) const = default;
};

struct DerivedTable {
  Box<Query> query;
  std::optional<std::string> alias;
  int occurrence = 0;
  SourceSpan span;

  bool operator==(const DerivedTable&) const = default;
};

struct TableRef;

enum class JoinKind { comma, inner, left, cross };

struct Join {
  JoinKind kind = JoinKind::inner;
  Box<TableRef> left;
  Box<TableRef> right;
  std::optional<Expr> on;
  bool operator==(const Join&) const;
};

struct TableRef {
  std::variant<TableName, TableFunction, DerivedTable, Join> node;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <class T>
  T* as() {
    return std::get_if<T>(&node);
  }

  bool operator==(const TableRef&) const = default;
};

struct SelectItem {
  Expr expr;
  std::optional<std::string> alias;
  bool operator==(const SelectItem&) const = default;
};

enum class SortDir { unspecified, asc, desc };

struct OrderItem {
  Expr expr;
  SortDir dir = SortDir::unspecified;
  bool operator==(const OrderItem&) const = default;
};

struct Select {
  bool distinct = false;
  std::vector<SelectItem> items;
  std::optional<TableRef> from;
  std::optional<Expr> where;
  std::vector<Expr> group_by;
  std::optional<Expr> having;
  std::vector<OrderItem> order_by;
  std::optional<Expr> limit;
  std::optional<Expr> offset;

  bool operator==(const Select&) const;
};

enum class SetOp { union_distinct, union_all, intersect, except };

struct Compound {
  SetOp op = SetOp::union_distinct;
  Box<Query> left;
  Box<Query> right;
  std::vector<OrderItem> order_by;
  std::optional<Expr> limit;
  std::optional<Expr> offset;

  bool operator==(const Compound&) const;
};

struct Query {
  std::variant<Select, Compound> body;

  const Select* select() const { return std::get_if<Select>(&body); }
  Select* select() { return std::get_if<Select>(&body); }
  const Compound* compound() const { return std::get_if<Compound>(&body); }
  Compound* compound() { return std::get_if<Compound>(&body); }

  // ORDER BY of the outermost level (the compound's, or the select's).
  const std::vector<OrderItem>& order_by() const;

  bool operator==(const Query&) const = default;
};

// A parsed statement. Table occurrences are numbered 0..occurrence_count-1
// in source order.
struct QueryAst {
  Query root;
  int occurrence_count = 0;
  std::string source;

  bool operator==(const QueryAst& o) const { return root == o.root && occurrence_count == o.occurrence_count; }
};

// Splits an expression into its top-level AND conjuncts.
std::vector<const Expr*> split_conjuncts(const Expr& e);
// Left-deep AND chain of the given conjuncts; nullopt when empty.
std::optional<Expr> join_conjuncts(std::vector<Expr> conjuncts);

}  // namespace hetfed::sql
