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
#include <string_view>
#include <vector>

#include "hetfed/value.h"

struct sqlite3;
struct sqlite3_stmt;

namespace hetfed {

// Owning handle for one SQLite connection.
class Database {
 public:
  static Database open(const std::string& path, bool read_only = true);
  static Database create(const std::string& path);
  static Database in_memory();

  Database(Database&& o) noexcept;
  Database& operator=(Database&& o) noexcept;
  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;
  ~Database();

  sqlite3* handle() const { return db_; }

  // Runs one or more statements, discarding results.
  void exec(std::string_view sql);
  // Runs a single statement and collects its rows.
  ResultTable query(std::string_view sql);
  // Names of the tables in the main schema, in creation order.
  std::vector<std::string> table_names();
  // CREATE statements of the main schema, one per table.
  std::string schema_dump();

 private:
  explicit Database(sqlite3* db) : db_(db) {}
  sqlite3* db_ = nullptr;
};

// Reads a column of the current row of a stepped statement.
Value column_value(sqlite3_stmt* stmt, int col);

}  // namespace hetfed
