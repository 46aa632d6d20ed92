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

#include <string_view>

#include "hetfed/sql/ast.h"

namespace hetfed::sql {

// Parses one SELECT statement of the supported subset. Qualified column
// references are bound to their table occurrence; unqualified ones are bound
// when the enclosing SELECT has a single table. Use resolve() with a view for
// full binding.
//
// Throws ParseError on malformed input and UnsupportedError for constructs
// outside the subset (CASE, CAST, window functions, DML, ...).
QueryAst parse(std::string_view sql_text);

}  // namespace hetfed::sql
