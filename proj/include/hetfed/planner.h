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

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hetfed/benchmark.h"
#include "hetfed/federation.h"
#include "hetfed/schema.h"
#include "json.hpp"

namespace hetfed {

// ---------------------------------------------------------------------------
// Prompts

struct PromptTemplate {
  std::string prefix;
  std::string format_instructions;
  std::string suffix;
  std::string table_selector;

  static const std::vector<std::string>& placeholders();
  static PromptTemplate defaults();
  // Reads prefix.txt, format_instructions.txt, suffix.txt and
  // table_selector.txt from `dir`; missing files keep the default text.
  static PromptTemplate load(const std::string& dir);

  // Substitutes {name} placeholders in one pass. Throws PlannerError when a
  // placeholder has no value.
  static std::string fill(const std::string& text, const std::map<std::string, std::string>& vars);
  std::string render(const std::map<std::string, std::string>& vars) const;
};

// ---------------------------------------------------------------------------
// Completion endpoints

class CompletionEndpoint {
 public:
  virtual ~CompletionEndpoint() = default;
  // Raw model text for `prompt`. Throws PlannerError on failure.
  virtual std::string complete(const std::string& prompt) = 0;
};

struct EndpointConfig {
  std::string url;
  std::string model;
  // "completions" sends {"prompt": ...}; "chat" sends {"messages": [...]}.
  std::string api = "completions";
  std::string api_key;
  std::chrono::milliseconds timeout{60000};
  double temperature = 0;
  int max_tokens = 512;

  // Fields present in `j` override the current values.
  void merge_json(const nlohmann::json& j);
  // HETFED_ENDPOINT_URL, _MODEL, _API, _API_KEY, _TIMEOUT (seconds),
  // _TEMPERATURE.
  void merge_env();
};

class HttpEndpoint : public CompletionEndpoint {
 public:
  explicit HttpEndpoint(EndpointConfig cfg);
  std::string complete(const std::string& prompt) override;

 private:
  EndpointConfig cfg_;
};

// Replays canned replies in order and records every prompt it was given.
class ScriptedEndpoint : public CompletionEndpoint {
 public:
  explicit ScriptedEndpoint(std::vector<std::string> replies);
  // Replies separated by lines holding only "---".
  static ScriptedEndpoint from_text(const std::string& text);

  std::string complete(const std::string& prompt) override;
  const std::vector<std::string>& prompts() const { return prompts_; }
  std::size_t remaining() const { return replies_.size() - next_; }

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
  std::vector<std::string> prompts_;
};

std::string complete(const std::string& prompt, CompletionEndpoint& endpoint);

// ---------------------------------------------------------------------------
// ReAct steps

struct ReactStep {
  std::string thought;
  std::string action;
  std::string action_input;
  std::string observation;
};

struct ParsedStep {
  std::string thought;
  std::optional<std::string> action;
  std::optional<std::string> action_input;
  std::optional<std::string> final_answer;

  bool well_formed() const { return (action && action_input) || final_answer; }
};

// Line-oriented parse on the Thought:/Action:/Action Input:/Final Answer:
// markers. Anything from an "Observation:" line on is ignored.
ParsedStep parse_step(const std::string& model_text);

inline constexpr const char* kListTablesTool = "sql_db_list_tables";
inline constexpr const char* kSchemaTool = "sql_db_schema";
inline constexpr const char* kCheckerTool = "sql_db_query_checker";
inline constexpr const char* kMaterializeTool = "sql_db_materialize";
inline constexpr const char* kQueryTool = "sql_db_query";

// Tools over one federation session. Observations carry schema text, table
// names, column names and row counts only.
class Toolbox {
 public:
  Toolbox(TableView view, FederationSession& session);

  std::vector<std::string> names() const;
  std::string descriptions() const;
  bool has(const std::string& name) const;

  struct Outcome {
    std::string observation;
    // Set when the tool was the query tool and the query ran.
    std::optional<ResultTable> result;
    bool blocked = false;  // rejected by the guardrails
  };
  Outcome run(const std::string& tool, const std::string& input);

  // Base view plus temp tables created so far.
  TableView current_view() const;
  std::vector<std::string> materialized_tables() const;
  // DDL-style description of the named tables (all when empty).
  std::string schema_text(const std::vector<std::string>& tables) const;
  // Number of inputs that reached the federation engine.
  std::size_t engine_calls() const { return engine_calls_; }
  const StepTrace& trace() const { return session_->trace(); }

 private:
  TableView view_;
  FederationSession* session_;
  std::size_t engine_calls_ = 0;
};

// ---------------------------------------------------------------------------
// Planning

enum class PlannerStatus { answered, gave_up, step_limit };

std::string_view status_name(PlannerStatus s);

struct PlannerResult {
  std::string final_sql;
  std::vector<ReactStep> steps;
  StepTrace trace;
  PlannerStatus status = PlannerStatus::gave_up;
  std::optional<ResultTable> result;
  std::size_t model_calls = 0;

  nlohmann::ordered_json to_json() const;
};

struct ReactOptions {
  int max_steps = 15;
  std::string dialect = "SQLite";
  std::string model_answer_prefix;
  // Tables whose schema is shown to the model; empty means all.
  std::vector<std::string> tables;
  // Called with every fully rendered prompt.
  std::function<void(const std::string&)> on_prompt;
};

std::vector<std::string> select_tables(const std::string& question, const TableView& view,
                                       CompletionEndpoint& endpoint, const PromptTemplate& tmpl);

PlannerResult react_loop(const std::string& question, Toolbox& tools, CompletionEndpoint& endpoint,
                         const PromptTemplate& tmpl, const ReactOptions& opts = {});

PlannerResult gold_replay(const std::string& question_id, const std::string& gold_sql);

// Table selection then the ReAct loop over a fresh session.
PlannerResult answer(const std::string& question, const TableView& view, const ExecContext& ctx,
                     CompletionEndpoint& endpoint, const PromptTemplate& tmpl, ReactOptions opts = {});

// Runs answer() for every question of the instance's databases and returns
// the final SQL of each (empty when the planner did not answer).
Predictions llm_predictions(const Corpus& corpus, const BenchmarkInstance& instance, const std::string& server_origin,
                            CompletionEndpoint& endpoint, const PromptTemplate& tmpl, const ReactOptions& opts = {});

}  // namespace hetfed
