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
#include "hetfed/sql/analysis.h"
#include "hetfed/sql/ast.h"
#include "hetfed/sql/render.h"

namespace hetfed {

// One API argument taken from an equality conjunct (or an explicit
// `param := literal` argument).
struct ArgBinding {
  std::string param;
  // Literal already coerced to the parameter's value type.
  sql::Literal value;
  sql::SourceSpan origin;

  bool operator==(const ArgBinding&) const = default;
};

// What happened to one virtual table occurrence.
struct OccurrenceRewrite {
  int occurrence = 0;
  std::string table;     // virtual table name in the view
  std::string udf_name;
  std::string exposed;   // name the occurrence is referenced by
  sql::SourceSpan span;  // span of the original table reference
  std::vector<ArgBinding> pushed;
  std::vector<sql::Predicate> residual;

  bool full_fetch() const { return pushed.empty(); }
};

struct RewrittenQuery {
  sql::QueryAst ast;
  // One entry per virtual occurrence, ordered by occurrence id.
  std::vector<OccurrenceRewrite> occurrences;

  const OccurrenceRewrite* find(int occurrence) const;
  std::string sql(sql::Dialect dialect = sql::Dialect::canonical) const { return sql::render(ast, dialect); }
};

struct BindResult {
  std::vector<ArgBinding> pushed;
  std::vector<sql::Predicate> residual;
  // Equality conjuncts whose literal cannot be represented in the
  // parameter's type. They are also listed in `residual`.
  std::vector<sql::Predicate> mismatched;
};

// Splits predicates on one occurrence into API arguments and residual
// filters. Never throws.
BindResult bind_arguments(const std::vector<sql::Predicate>& conjuncts, const ApiMapping& mapping);
BindResult bind_arguments(const std::vector<sql::Predicate>& conjuncts, const std::vector<ApiParam>& params);

// Converts a literal compared against a column of type `type` into the
// literal the API receives, following the engine's comparison affinity.
// nullopt when the comparison can never hold or the conversion is lossy.
std::optional<sql::Literal> coerce_literal(const sql::Literal& lit, ValueType type);

// Replaces every virtual table occurrence with its table function and
// pushes equality filters into the call. Throws RewriteError on unknown
// tables, functions, parameters or columns, and on literal/parameter type
// mismatches.
RewrittenQuery rewrite(const sql::QueryAst& ast, const TableView& view);

}  // namespace hetfed
