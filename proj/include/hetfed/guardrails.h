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
#include <string_view>
#include <vector>

#include "hetfed/schema.h"
#include "hetfed/sql/analysis.h"
#include "hetfed/sql/ast.h"
#include "json.hpp"

namespace hetfed {

enum class Rule { invalid_entity, invalid_api_signature, invalid_subquery_column };

std::string_view rule_name(Rule r);

struct Violation {
  Rule rule = Rule::invalid_entity;
  sql::SourceSpan location;
  std::string subject;
  // Up to three near misses, best first.
  std::vector<std::string> candidates;
  // Table, API or scope the subject was looked up in.
  std::string context;
  // Every name that would have been accepted in place of the subject.
  std::vector<std::string> valid_names;
  sql::ResolveIssue::Kind cause = sql::ResolveIssue::Kind::unknown_table;
};

struct Hint {
  std::string text;
  Violation violation;
};

// Case-insensitive near misses of `subject` among `names`: edit distance at
// most 2, or the same set of words in a different order.
std::vector<std::string> near_misses(std::string_view subject, const std::vector<std::string>& names,
                                     std::size_t limit = 3);

std::vector<Violation> check(const sql::QueryAst& ast, const TableView& view);

Hint hint_for(const Violation& v);

// Hint for text that failed to parse.
std::string parse_failure_hint(const std::string& message);

struct CheckOutcome {
  std::optional<std::string> parse_error;
  std::vector<Violation> violations;

  bool ok() const { return !parse_error && violations.empty(); }
  // One hint per line; empty when ok().
  std::string hint_text() const;
};

CheckOutcome check_sql(std::string_view sql_text, const TableView& view);

nlohmann::ordered_json to_json(const Violation& v);
nlohmann::ordered_json to_json(const Hint& h);
nlohmann::ordered_json to_json(const CheckOutcome& c);

}  // namespace hetfed
