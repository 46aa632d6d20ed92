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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "hetfed/benchmark.h"
#include "hetfed/error.h"
#include "hetfed/sqlite.h"
#include "util.h"

namespace fs = std::filesystem;

namespace hetfed {

std::string Corpus::db_path(const std::string& db_id) const {
  if (!has_db(db_id)) throw BenchmarkError("unknown database '" + db_id + "'");
  fs::path schema = fs::path(root) / "database" / db_id / "schema.sql";
  fs::path dir = cache_dir.empty() ? schema.parent_path() : fs::path(cache_dir);
  fs::path db = dir / (db_id + ".sqlite");
  if (fs::exists(db) && fs::last_write_time(db) >= fs::last_write_time(schema)) return db.string();
  fs::create_directories(dir);
  fs::path tmp = dir / (db_id + ".sqlite.tmp" + std::to_string(::getpid()));
  fs::remove(tmp);
  {
    Database d = Database::create(tmp.string());
    d.exec("BEGIN");
    d.exec(detail::read_file(schema.string()));
    d.exec("COMMIT");
  }
  fs::rename(tmp, db);
  return db.string();
}

std::vector<const Question*> Corpus::questions_for(const std::string& db_id) const {
  std::vector<const Question*> out;
  for (const auto& q : questions)
    if (q.db_id == db_id) out.push_back(&q);
  return out;
}

bool Corpus::has_db(const std::string& db_id) const {
  return std::find(db_ids.begin(), db_ids.end(), db_id) != db_ids.end();
}

Corpus load_corpus(const std::string& root, const std::string& cache_dir) {
  Corpus c;
  c.root = root;
  c.cache_dir = cache_dir;
  fs::path dbs = fs::path(root) / "database";
  if (!fs::is_directory(dbs)) throw BenchmarkError("corpus has no database directory: " + dbs.string());
  for (const auto& e : fs::directory_iterator(dbs))
    if (e.is_directory() && fs::exists(e.path() / "schema.sql")) c.db_ids.push_back(e.path().filename().string());
  std::sort(c.db_ids.begin(), c.db_ids.end());

  fs::path qpath = fs::path(root) / "questions.json";
  if (fs::exists(qpath)) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(detail::read_file(qpath.string()));
    } catch (const nlohmann::json::exception& e) {
      throw BenchmarkError("cannot read " + qpath.string() + ": " + e.what());
    }
    std::size_t i = 0;
    for (const auto& j : doc) {
      ++i;
      Question q;
      q.id = j.contains("id") ? j.at("id").get<std::string>() : detail::padded_id("q", i);
      q.db_id = j.at("db_id").get<std::string>();
      q.question = j.at("question").get<std::string>();
      q.query = j.at("query").get<std::string>();
      if (j.contains("hardness")) q.hardness = j.at("hardness").get<std::string>();
      if (!c.has_db(q.db_id)) throw BenchmarkError("question " + q.id + " refers to unknown database " + q.db_id);
      c.questions.push_back(std::move(q));
    }
  }
  return c;
}

}  // namespace hetfed
