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
#include "hetfed/guardrails.h"

#include <algorithm>
#include <set>
#include <tuple>

#include "hetfed/error.h"
#include "hetfed/sql/analysis.h"
#include "hetfed/sql/parser.h"
#include "hetfed/text.h"

namespace hetfed {

namespace {

using nlohmann::ordered_json;
using sql::ResolveIssue;

std::set<std::string> token_set(std::string_view s) {
  auto words = text::word_tokens(s);
  return {words.begin(), words.end()};
}

std::string quoted_list(const std::vector<std::string>& names) {
  std::vector<std::string> q;
  for (const auto& n : names) q.push_back("'" + n + "'");
  return text::join(q, ", ");
}

Rule rule_for(const ResolveIssue& issue) {
  switch (issue.kind) {
    case ResolveIssue::Kind::unknown_function:
    case ResolveIssue::Kind::unknown_param:
      return Rule::invalid_api_signature;
    case ResolveIssue::Kind::unknown_column:
    case ResolveIssue::Kind::ambiguous_column:
      return issue.depth > 0 ? Rule::invalid_subquery_column : Rule::invalid_entity;
    default:
      return Rule::invalid_entity;
  }
}

std::string with_suggestion(const Violation& v, const std::string& list_label) {
  if (!v.candidates.empty()) {
    std::string s = "; did you mean '" + v.candidates.front() + "'";
    if (v.candidates.size() > 1) {
      std::vector<std::string> rest(v.candidates.begin() + 1, v.candidates.end());
      s += " (other close matches: " + quoted_list(rest) + ")";
    }
    return s + "?";
  }
  if (v.valid_names.empty()) return ".";
  return "; " + list_label + " are " + quoted_list(v.valid_names) + ".";
}

std::string column_location(const std::string& context) {
  if (context.empty()) return "in this query";
  if (context == "compound result") return "in the compound query result";
  if (context.find(", ") != std::string::npos) return "on any of the tables " + context;
  return "on table '" + context + "'";
}

}  // namespace

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::invalid_entity:
      return "invalid_entity";
    case Rule::invalid_api_signature:
      return "invalid_api_signature";
    case Rule::invalid_subquery_column:
      return "invalid_subquery_column";
  }
  return "invalid_entity";
}

std::vector<std::string> near_misses(std::string_view subject, const std::vector<std::string>& names,
                                     std::size_t limit) {
  const auto subject_tokens = token_set(subject);
  std::vector<std::tuple<std::size_t, std::string, std::string>> ranked;
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) continue;
    const std::size_t d = text::edit_distance(subject, name);
    if (d == 0) continue;
    std::size_t rank;
    if (d <= 2)
      rank = d;
    else if (!subject_tokens.empty() && token_set(name) == subject_tokens)
      rank = 3;
    else
      continue;
    ranked.emplace_back(rank, text::lower(name), name);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::string> out;
  for (const auto& r : ranked) {
    if (out.size() >= limit) break;
    out.push_back(std::get<2>(r));
  }
  return out;
}

std::vector<Violation> check(const sql::QueryAst& ast, const TableView& view) {
  sql::QueryAst copy = ast;
  std::vector<Violation> out;
  for (auto& issue : sql::resolve(copy, view)) {
    Violation v;
    v.rule = rule_for(issue);
    v.location = issue.span;
    v.subject = issue.subject;
    v.context = issue.context;
    v.valid_names = issue.valid_names;
    v.cause = issue.kind;
    if (v.cause != ResolveIssue::Kind::ambiguous_column && v.cause != ResolveIssue::Kind::duplicate_alias)
      v.candidates = near_misses(v.subject, v.valid_names);
    out.push_back(std::move(v));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Violation& a, const Violation& b) { return a.location.offset < b.location.offset; });
  return out;
}

Hint hint_for(const Violation& v) {
  const std::string subj = "'" + v.subject + "'";
  std::string t;
  switch (v.cause) {
    case ResolveIssue::Kind::unknown_table:
      t = "Table " + subj + " does not exist" + with_suggestion(v, "valid tables");
      break;
    case ResolveIssue::Kind::unknown_qualifier:
      t = "Table or alias " + subj + " is not defined in this scope" + with_suggestion(v, "tables in scope");
      break;
    case ResolveIssue::Kind::duplicate_alias:
      t = "Alias " + subj + " is used more than once in the same FROM clause; give each table a distinct alias.";
      break;
    case ResolveIssue::Kind::ambiguous_column:
      t = "Column " + subj + " is ambiguous between tables " + v.context + "; qualify it with a table name or alias.";
      break;
    case ResolveIssue::Kind::unknown_column:
      t = "Column " + subj + " does not exist " + column_location(v.context) + with_suggestion(v, "valid columns");
      break;
    case ResolveIssue::Kind::unknown_function:
      t = "API function " + subj + " does not exist" + with_suggestion(v, "available API functions");
      break;
    case ResolveIssue::Kind::unknown_param:
      t = "API '" + v.context + "' has no parameter " + subj;
      if (v.valid_names.empty())
        t += " and accepts no parameters; call it with no arguments.";
      else if (!v.candidates.empty())
        t += "; did you mean '" + v.candidates.front() + "' (valid parameters: " + text::join(v.valid_names, ", ") +
             ")?";
      else
        t += "; valid parameters are " + quoted_list(v.valid_names) + ".";
      break;
  }
  return {t, v};
}

std::string parse_failure_hint(const std::string& message) {
  std::string flat;
  for (char c : message) flat += (c == '\n' || c == '\r') ? ' ' : c;
  return "The query could not be parsed (" + text::trim(flat) +
         "); rewrite it as a single SQLite SELECT statement.";
}

std::string CheckOutcome::hint_text() const {
  std::vector<std::string> lines;
  if (parse_error) lines.push_back(parse_failure_hint(*parse_error));
  for (const auto& v : violations) lines.push_back(hint_for(v).text);
  return text::join(lines, "\n");
}

CheckOutcome check_sql(std::string_view sql_text, const TableView& view) {
  CheckOutcome out;
  try {
    out.violations = check(sql::parse(sql_text), view);
  } catch (const ParseError& e) {
    out.parse_error = e.what();
  }
  return out;
}

ordered_json to_json(const Violation& v) {
  ordered_json j;
  j["rule"] = std::string(rule_name(v.rule));
  j["subject"] = v.subject;
  j["location"] = {{"offset", v.location.offset},
                   {"length", v.location.length},
                   {"line", v.location.line},
                   {"column", v.location.column}};
  j["candidates"] = v.candidates;
  j["context"] = v.context;
  return j;
}

ordered_json to_json(const Hint& h) {
  ordered_json j;
  j["text"] = h.text;
  j["violation"] = to_json(h.violation);
  return j;
}

ordered_json to_json(const CheckOutcome& c) {
  ordered_json j;
  j["valid"] = c.ok();
  j["parse_error"] = c.parse_error ? ordered_json(*c.parse_error) : ordered_json(nullptr);
  j["violations"] = ordered_json::array();
  for (const auto& v : c.violations) j["violations"].push_back(to_json(hint_for(v)));
  return j;
}

}  // namespace hetfed
