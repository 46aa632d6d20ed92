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

#include <string>

#include "hetfed/sql/ast.h"

namespace hetfed::sql {

enum class Dialect {
  // Canonical text; table functions print as name(param := literal).
  canonical,
  // Text accepted by the embedded engine; table functions print in the
  // positional form understood by the registered API modules.
  engine,
};

std::string render(const QueryAst& ast, Dialect dialect = Dialect::canonical);
std::string render(const Query& q, Dialect dialect = Dialect::canonical);
std::string render(const Expr& e, Dialect dialect = Dialect::canonical);
std::string render(const TableRef& t, Dialect dialect = Dialect::canonical);

// Quotes an identifier with backticks when it is not a plain word or
// collides with a keyword.
std::string render_identifier(const std::string& name);

bool is_keyword(std::string_view word);

}  // namespace hetfed::sql
