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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hetfed/federation.h"
#include "hetfed/schema.h"
#include "hetfed/sql/ast.h"
#include "hetfed/value.h"

namespace hetfed {

// ---------------------------------------------------------------------------
// Corpus

struct Question {
  std::string id;
  std::string db_id;
  std::string question;
  std::string query;
  std::optional<std::string> hardness;
};

// A Spider-style corpus: database/<db_id>/schema.sql plus questions.json.
struct Corpus {
  std::string root;
  std::string cache_dir;
  std::vector<std::string> db_ids;
  std::vector<Question> questions;

  // Path of the SQLite file for `db_id`, built from schema.sql on first use.
  std::string db_path(const std::string& db_id) const;
  std::vector<const Question*> questions_for(const std::string& db_id) const;
  bool has_db(const std::string& db_id) const;
};

// `cache_dir` receives the built database files; empty means next to the
// schema files.
Corpus load_corpus(const std::string& root, const std::string& cache_dir = "");

// ---------------------------------------------------------------------------
// Mutation

struct BenchmarkConfig {
  double attr = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> databases;  // empty = all corpus databases
};

struct ManifestTable {
  std::string name;
  bool replaced = false;
};

struct ManifestDb {
  std::string db_id;
  std::vector<ManifestTable> tables;

  std::size_t replaced_count() const;
  std::vector<std::string> replaced_tables() const;
};

struct Manifest {
  double attr = 0;
  std::uint64_t seed = 0;
  std::vector<ManifestDb> databases;

  const ManifestDb* find(const std::string& db_id) const;
  nlohmann::ordered_json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

// Number of tables replaced out of `n` at the given ratio.
std::size_t replaced_count(double attr, std::size_t n);

// Tables to replace, in their original order.
std::vector<std::string> choose_tables(const std::string& db_id, const std::vector<std::string>& tables, double attr,
                                       std::uint64_t seed);

inline constexpr const char* kDefaultServer = "http://127.0.0.1:8080";

class BenchmarkInstance {
 public:
  std::string dir;
  Manifest manifest;

  std::string original_db(const std::string& db_id) const;
  std::string pruned_db(const std::string& db_id) const;
  std::string schema_path(const std::string& db_id) const;
  std::string spec_path(const std::string& db_id, const std::string& table) const;
  std::string fixture_path(const std::string& db_id, const std::string& table) const;

  AbstractSchema schema(const std::string& db_id) const;
  std::vector<ApiMapping> mappings(const std::string& db_id) const;
  TableView view(const std::string& db_id) const;
  // Execution context for the pruned database. When `server_origin` is set
  // (e.g. "http://127.0.0.1:34567") every API URL is redirected to it.
  ExecContext context(const std::string& db_id, const std::string& server_origin = "") const;
};

BenchmarkInstance mutate(const Corpus& corpus, const BenchmarkConfig& cfg, const std::string& out_dir);
BenchmarkInstance load_instance(const std::string& dir);

// Column names and the value type of each, plus rows, of one fixture.
struct Fixture {
  std::vector<AttributeDef> columns;
  std::vector<Row> rows;
};

Fixture load_fixture(const std::string& path, const EntityDef& entity);
// Canonical JSON-lines text of a table.
std::string fixture_text(const EntityDef& entity, const std::vector<Row>& rows);

// ---------------------------------------------------------------------------
// Serving

struct FilterOutcome {
  int status = 200;
  std::string body;
};

// In-memory fixture store answering equality-filtered lookups.
class FixtureStore {
 public:
  explicit FixtureStore(const BenchmarkInstance& instance);

  // `path` is "/<db>/<table>" or "/<table>" when a default db is set.
  FilterOutcome handle(const std::string& path, const std::vector<std::pair<std::string, std::string>>& params) const;
  // Rows of `table` matching all parameters, or nullopt if a parameter is
  // unknown.
  std::optional<std::vector<Row>> filter(const std::string& db_id, const std::string& table,
                                         const std::vector<std::pair<std::string, std::string>>& params) const;
  const Fixture* fixture(const std::string& db_id, const std::string& table) const;

  void set_default_db(std::string db_id) { default_db_ = std::move(db_id); }

 private:
  std::map<std::string, std::map<std::string, Fixture>> data_;
  std::string default_db_;
};

class MockServer {
 public:
  explicit MockServer(const BenchmarkInstance& instance, std::string default_db = "");
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Binds and starts serving in a background thread. Port 0 picks a free
  // port. Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop() is called.
  void run(const std::string& host, int port);
  void stop();
  std::string origin() const;
  const FixtureStore& store() const { return store_; }

 private:
  struct Impl;
  FixtureStore store_;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation

// Whether two results are equal: same arity, rows equal as multisets (or as
// sequences when `ordered`), reals within a relative tolerance of 1e-6,
// NULL equal to NULL.
bool compare_result_sets(const ResultTable& a, const ResultTable& b, bool ordered);
bool values_equal(const Value& a, const Value& b);

inline constexpr double kRealTolerance = 1e-6;

// Difficulty bucket (easy, medium, hard, extra) from component counts.
std::string hardness(const sql::QueryAst& ast);

struct Verdict {
  std::string question_id;
  std::string db_id;
  std::string hardness;
  bool correct = false;
  std::string error;
};

struct Accuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct EvalReport {
  double attr = 0;
  std::vector<Verdict> verdicts;

  Accuracy overall() const;
  Accuracy bucket(const std::string& hardness) const;
  nlohmann::ordered_json to_json() const;
};

inline const std::vector<std::string>& difficulty_buckets() {
  static const std::vector<std::string> b{"easy", "medium", "hard", "extra"};
  return b;
}

// Question id -> predicted SQL over the view.
using Predictions = std::map<std::string, std::string>;

Predictions gold_predictions(const Corpus& corpus, const Manifest& manifest);

// Scores every question of the instance's databases. A missing or failing
// prediction is incorrect.
EvalReport evaluate(const Predictions& predictions, const Corpus& corpus, const BenchmarkInstance& instance,
                    const std::string& server_origin = "");

// Plain-text table: one row per report, columns easy/medium/hard/extra/overall.
std::string format_report_table(const std::vector<EvalReport>& reports);

}  // namespace hetfed
