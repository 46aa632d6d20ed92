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

#include "hetfed/sqlite.h"

#include <sqlite3.h>

#include "hetfed/error.h"

namespace hetfed {

Database Database::open(const std::string& path, bool read_only) {
  sqlite3* db = nullptr;
  int flags = read_only ? SQLITE_OPEN_READONLY : SQLITE_OPEN_READWRITE;
  int rc = sqlite3_open_v2(path.c_str(), &db, flags | SQLITE_OPEN_URI, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : sqlite3_errstr(rc);
    sqlite3_close(db);
    throw ExecError("cannot open database '" + path + "': " + msg);
  }
  return Database(db);
}

Database Database::create(const std::string& path) {
  sqlite3* db = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : sqlite3_errstr(rc);
    sqlite3_close(db);
    throw ExecError("cannot create database '" + path + "': " + msg);
  }
  return Database(db);
}

Database Database::in_memory() { return create(":memory:"); }

Database::Database(Database&& o) noexcept : db_(o.db_) { o.db_ = nullptr; }

Database& Database::operator=(Database&& o) noexcept {
  if (this != &o) {
    sqlite3_close(db_);
    db_ = o.db_;
    o.db_ = nullptr;
  }
  return *this;
}

Database::~Database() { sqlite3_close(db_); }

void Database::exec(std::string_view sql) {
  char* err = nullptr;
  std::string text(sql);
  if (sqlite3_exec(db_, text.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : sqlite3_errmsg(db_);
    sqlite3_free(err);
    throw ExecError(msg);
  }
}

Value column_value(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_INTEGER:
      return Value{static_cast<std::int64_t>(sqlite3_column_int64(stmt, col))};
    case SQLITE_FLOAT:
      return Value{sqlite3_column_double(stmt, col)};
    case SQLITE_NULL:
      return Value{};
    default: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_column_blob(stmt, col));
      return Value{std::string(p ? p : "", static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)))};
    }
  }
}

ResultTable Database::query(std::string_view sql) {
  sqlite3_stmt* stmt = nullptr;
  const char* tail = nullptr;
  if (sqlite3_prepare_v2(db_, sql.data(), static_cast<int>(sql.size()), &stmt, &tail) != SQLITE_OK)
    throw ExecError(sqlite3_errmsg(db_));
  ResultTable out;
  int n = sqlite3_column_count(stmt);
  for (int i = 0; i < n; ++i) out.columns.emplace_back(sqlite3_column_name(stmt, i));
  int rc;
  while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    Row row;
    row.reserve(n);
    for (int i = 0; i < n; ++i) row.push_back(column_value(stmt, i));
    out.rows.push_back(std::move(row));
  }
  if (rc != SQLITE_DONE) {
    std::string msg = sqlite3_errmsg(db_);
    sqlite3_finalize(stmt);
    throw ExecError(msg);
  }
  sqlite3_finalize(stmt);
  return out;
}

std::vector<std::string> Database::table_names() {
  std::vector<std::string> out;
  for (const auto& r : query("SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' "
                             "ORDER BY rowid")
                           .rows)
    out.push_back(std::get<std::string>(r[0]));
  return out;
}

std::string Database::schema_dump() {
  std::string out;
  for (const auto& r :
       query("SELECT sql FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY rowid").rows) {
    if (is_null(r[0])) continue;
    out += std::get<std::string>(r[0]);
    out += ";\n";
  }
  return out;
}

}  // namespace hetfed
