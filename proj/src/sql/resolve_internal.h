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

#include <vector>

#include "hetfed/schema.h"
#include "hetfed/sql/analysis.h"

namespace hetfed::sql::detail {

// Binds column references. Without a view only qualified references and
// references in single-table scopes are bound, and no issues are reported.
void bind_columns(QueryAst& ast, const TableView* view, std::vector<ResolveIssue>* issues);

}  // namespace hetfed::sql::detail
