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

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "hetfed/benchmark.h"
#include "hetfed/schema.h"
#include "hetfed/sqlite.h"

namespace hetfed::testing {

inline std::string corpus_root() { return std::string(HETFED_DATA_DIR) + "/corpus"; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("hetfed-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string sub(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Corpus whose built databases live in a shared per-process temp dir.
inline const Corpus& shared_corpus() {
  static TempDir cache("cache");
  static Corpus c = load_corpus(corpus_root(), cache.str());
  return c;
}

inline AbstractSchema museum_schema(bool museum_is_api) {
  AbstractSchema s = derive_abstract_from_db(R"(
CREATE TABLE "museum" (
"Museum_ID" int,
"Name" text,
"Num_of_Staff" int,
"Open_Year" text,
PRIMARY KEY ("Museum_ID")
);
CREATE TABLE "visitor" (
"ID" int,
"Name" text,
"Level_of_membership" int,
"Age" int,
PRIMARY KEY ("ID")
);
CREATE TABLE "visit" (
"Museum_ID" int,
"visitor_ID" int,
"Num_of_Ticket" int,
"Total_spent" real,
PRIMARY KEY ("Museum_ID","visitor_ID"),
FOREIGN KEY ("Museum_ID") REFERENCES "museum"("Museum_ID"),
FOREIGN KEY ("visitor_ID") REFERENCES "visitor"("ID")
);
)");
  if (museum_is_api) s.find_entity("museum")->source_kind = SourceKind::api;
  return s;
}

inline std::vector<ApiMapping> museum_mappings(const AbstractSchema& s, const std::string& server) {
  std::vector<ApiMapping> out;
  for (const auto& e : s.entities)
    if (e.source_kind == SourceKind::api) {
      auto m = derive_api_mapping_from_openapi_doc(openapi_for_entity(e, server, e.name));
      out.insert(out.end(), m.begin(), m.end());
    }
  return out;
}

inline TableView museum_view(bool museum_is_api) {
  auto s = museum_schema(museum_is_api);
  return generate_table_view(s, museum_mappings(s, "http://127.0.0.1:8080/museum_visit"));
}

// museum_visit with every table behind an API, served in-process.
struct Served {
  TempDir dir{"fed"};
  BenchmarkInstance inst;
  std::unique_ptr<MockServer> server;

  Served() {
    inst = mutate(shared_corpus(), {100, 3, {"museum_visit"}}, dir.str());
    server = std::make_unique<MockServer>(inst);
    server->start();
  }
  ExecContext ctx() const { return inst.context("museum_visit", server->origin()); }
  TableView view() const { return inst.view("museum_visit"); }
  ResultTable original(const std::string& sql) const {
    return Database::open(inst.original_db("museum_visit")).query(sql);
  }
};

inline Served& served() {
  static Served s;
  return s;
}

}  // namespace hetfed::testing
