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

#include <optional>
#include <string>
#include <vector>

#include "hetfed/schema.h"
#include "hetfed/sql/ast.h"

namespace hetfed::sql {

enum class OccurrenceKind { table, function, derived };

struct TableOccurrence {
  std::string table_name;  // empty for derived tables
  std::optional<std::string> alias;
  std::string scope_path;
  int occurrence = 0;
  OccurrenceKind kind = OccurrenceKind::table;
  SourceSpan span;

  bool operator==(const TableOccurrence&) const = default;
};

// Every table occurrence, including those inside subqueries and set
// operands, in source order.
std::vector<TableOccurrence> table_refs(const QueryAst& ast);

enum class PredicateOp { eq, ne, lt, le, gt, ge, like, in, between, is_null };

// A top-level conjunct shaped as `column op rhs`. Conjuncts written as
// `literal op column` are normalized so that `column` is the left side.
struct Predicate {
  ColumnRef column;
  PredicateOp op = PredicateOp::eq;
  bool negated = false;
  // Set when the right side is a single literal (negative numbers included).
  std::optional<Literal> literal;
  // The conjunct exactly as it appears in the WHERE clause.
  Expr conjunct;
  // Position of the conjunct in split_conjuncts(where).
  std::size_t conjunct_index = 0;
};

// Top-level AND conjuncts of the WHERE clause that directly encloses `ref`
// whose column side resolves to `ref`. Conjuncts under OR or NOT, and
// conjuncts of other scopes, are never returned.
std::vector<Predicate> conjuncts_for(const QueryAst& ast, const TableOccurrence& ref);

// Problems found while binding identifiers against a view.
struct ResolveIssue {
  enum class Kind {
    unknown_table,
    unknown_function,
    unknown_param,
    unknown_qualifier,
    unknown_column,
    ambiguous_column,
    duplicate_alias,
  };
  Kind kind;
  std::string subject;
  // Table (or API) the subject was looked up in; empty when not applicable.
  std::string context;
  // Names that would have been valid in place of the subject.
  std::vector<std::string> valid_names;
  SourceSpan span;
  // 0 for the outermost query and its set operands; >0 inside subqueries.
  int depth = 0;
};

// Binds every column reference against `view`, overwriting bindings made by
// the parser, and returns the issues encountered.
std::vector<ResolveIssue> resolve(QueryAst& ast, const TableView& view);

// Same as resolve() but throws ResolveError on the first issue.
void resolve_strict(QueryAst& ast, const TableView& view);

// Output column names of a query as the engine would report them.
std::vector<std::string> output_names(const Query& q, const TableView* view = nullptr);

}  // namespace hetfed::sql
