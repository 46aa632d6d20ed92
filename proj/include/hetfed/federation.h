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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hetfed/rewriter.h"
#include "hetfed/schema.h"
#include "hetfed/sqlite.h"
#include "hetfed/value.h"

namespace hetfed {

struct ExecContext {
  std::string db_path;
  // udf_name -> mapping
  std::map<std::string, ApiMapping> registered_udfs;
  std::chrono::milliseconds http_timeout{10000};
  // entity name -> absolute URL replacing ApiMapping::url
  std::map<std::string, std::string> base_url_overrides;

  // Registers every mapping under udf_name_for(entity).
  static ExecContext make(std::string db_path, const std::vector<ApiMapping>& mappings);
  std::string url_for(const ApiMapping& m) const;
};

enum class StepStatus { ok, error };

struct TraceStep {
  int index = 0;
  std::string description;
  std::optional<std::string> temp_table;
  std::optional<std::size_t> row_count;
  StepStatus status = StepStatus::ok;
};

// Record of what a session did. Holds table names, counts and statuses
// only, never cell values.
struct StepTrace {
  std::vector<TraceStep> steps;

  nlohmann::json to_json() const;
  std::string serialize() const;
};

// Request target ("/path?Param=value&...") for a GET call.
std::string request_target(const std::string& url, const ApiMapping& mapping, const std::vector<ArgBinding>& args);

// One HTTP request. Rows follow mapping.output_fields order.
std::vector<Row> call_api(const ApiMapping& mapping, const std::vector<ArgBinding>& args, const ExecContext& ctx);

struct ApiCallRecord {
  std::string udf_name;
  int occurrence = -1;
  std::vector<ArgBinding> args;
  std::size_t row_count = 0;
};

// One engine connection with every registered mapping available as a
// table-valued function. Not thread-safe.
class FederationSession {
 public:
  explicit FederationSession(ExecContext ctx);
  ~FederationSession();
  FederationSession(const FederationSession&) = delete;
  FederationSession& operator=(const FederationSession&) = delete;

  ResultTable execute(const RewrittenQuery& rq);
  // Runs engine-dialect SQL as is. Table functions fetch on first use.
  ResultTable execute_sql(const std::string& engine_sql);
  // Stores the result in tmp_step_<k> and returns (name, row count).
  std::pair<std::string, std::size_t> materialize_temp(const RewrittenQuery& rq);

  // Temp tables created so far, as base tables.
  std::vector<ViewTable> temp_tables();

  const StepTrace& trace() const { return trace_; }
  const std::vector<ApiCallRecord>& api_calls() const { return calls_; }
  const ExecContext& context() const { return ctx_; }
  Database& db() { return db_; }

  // Used by the table-function implementation.
  std::shared_ptr<const std::vector<Row>> rows_for(const std::string& udf, int occurrence,
                                                   const std::vector<ArgBinding>& args);
  const ApiMapping& mapping_for(const std::string& udf) const;

 private:
  void prefetch(const RewrittenQuery& rq);
  ResultTable run(const RewrittenQuery& rq);
  std::string tables_of(const RewrittenQuery& rq) const;

  ExecContext ctx_;
  Database db_;
  StepTrace trace_;
  int next_temp_ = 1;
  std::vector<std::string> temps_;
  std::map<std::string, std::shared_ptr<const std::vector<Row>>> cache_;
  std::vector<ApiCallRecord> calls_;
};

// Single-query convenience wrapper over a fresh session.
ResultTable execute(const RewrittenQuery& rq, const ExecContext& ctx);

}  // namespace hetfed
