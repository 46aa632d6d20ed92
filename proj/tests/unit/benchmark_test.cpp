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
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>

#include "hetfed/benchmark.h"
#include "hetfed/error.h"
#include "hetfed/sql/parser.h"
#include "hetfed/sqlite.h"
#include "hetfed/text.h"
#include "test_support.h"

namespace hetfed {
namespace {

namespace fs = std::filesystem;
using testing::served;

TEST(ReplacedCount, MatchesRoundHalfUp) {
  // Integer oracle: round(attr*n/100) half up, at least one when attr > 0.
  for (int attr = 0; attr <= 100; ++attr)
    for (std::size_t n = 0; n <= 12; ++n) {
      std::size_t k = (static_cast<std::size_t>(attr) * n * 2 + 100) / 200;
      if (attr > 0 && n > 0) k = std::max<std::size_t>(k, 1);
      EXPECT_EQ(replaced_count(attr, n), k) << attr << " " << n;
    }
  EXPECT_EQ(replaced_count(20, 3), 1u);
  EXPECT_EQ(replaced_count(50, 3), 2u);
  EXPECT_EQ(replaced_count(100, 4), 4u);
  EXPECT_THROW(replaced_count(101, 3), BenchmarkError);
  EXPECT_THROW(replaced_count(-1, 3), BenchmarkError);
}

TEST(ChooseTables, DeterministicAndNested) {
  const std::vector<std::string> tables{"a", "b", "c", "d", "e"};
  EXPECT_EQ(choose_tables("db", tables, 40, 9), choose_tables("db", tables, 40, 9));
  for (double attr : {0.0, 20.0, 40.0, 60.0, 80.0, 100.0}) {
    const auto chosen = choose_tables("db", tables, attr, 9);
    EXPECT_EQ(chosen.size(), replaced_count(attr, tables.size()));
    EXPECT_TRUE(std::is_sorted(chosen.begin(), chosen.end()));
  }
}

TEST(Mutate, LayoutAndPrunedDatabase) {
  const Corpus& c = testing::shared_corpus();
  testing::TempDir dir("mut");
  const BenchmarkInstance inst = mutate(c, {20, 7, {"museum_visit"}}, dir.str());
  ASSERT_EQ(inst.manifest.databases.size(), 1u);
  const ManifestDb& db = inst.manifest.databases[0];
  EXPECT_EQ(db.replaced_count(), 1u);
  const std::string t = db.replaced_tables().at(0);
  EXPECT_TRUE(fs::exists(inst.spec_path("museum_visit", t)));
  EXPECT_TRUE(fs::exists(inst.fixture_path("museum_visit", t)));
  EXPECT_TRUE(fs::exists(inst.schema_path("museum_visit")));
  EXPECT_TRUE(fs::exists(dir.sub("manifest.json")));

  Database pruned = Database::open(inst.pruned_db("museum_visit"));
  Database original = Database::open(inst.original_db("museum_visit"));
  const auto names = pruned.query("SELECT name FROM sqlite_master WHERE type = 'table' ORDER BY name");
  EXPECT_EQ(names.rows.size(), 2u);
  for (const auto& r : names.rows) EXPECT_NE(std::get<std::string>(r[0]), t);
  for (const auto& r : names.rows) {
    const std::string q = "SELECT * FROM " + std::get<std::string>(r[0]);
    EXPECT_TRUE(compare_result_sets(pruned.query(q), original.query(q), false)) << q;
  }

  // Fixture holds exactly the original rows.
  const auto schema = inst.schema("museum_visit");
  const Fixture f = load_fixture(inst.fixture_path("museum_visit", t), *schema.find_entity(t));
  ResultTable fixture_rows{{}, f.rows};
  for (const auto& col : f.columns) fixture_rows.columns.push_back(col.name);
  ResultTable orig = original.query("SELECT * FROM " + t);
  EXPECT_TRUE(compare_result_sets(fixture_rows, orig, false));

  // Reloading yields the same manifest, schema and mappings.
  const BenchmarkInstance again = load_instance(dir.str());
  EXPECT_EQ(again.manifest.to_json(), inst.manifest.to_json());
  EXPECT_EQ(again.mappings("museum_visit"), inst.mappings("museum_visit"));
  const auto mapping = inst.mappings("museum_visit").at(0);
  EXPECT_EQ(mapping.entity_name, t);
  EXPECT_EQ(mapping.url, std::string(kDefaultServer) + "/museum_visit/" + t);
  std::ifstream spec(inst.spec_path("museum_visit", t));
  std::stringstream spec_text;
  spec_text << spec.rdbuf();
  EXPECT_EQ(derive_api_mapping_from_openapi(spec_text.str()), inst.mappings("museum_visit"));
}

TEST(Mutate, SameSeedSameBytes) {
  const Corpus& c = testing::shared_corpus();
  testing::TempDir a("ma"), b("mb");
  mutate(c, {60, 42, {}}, a.str());
  mutate(c, {60, 42, {}}, b.str());
  for (const auto& e : fs::recursive_directory_iterator(a.str())) {
    if (!e.is_regular_file() || e.path().extension() == ".sqlite") continue;
    const auto rel = fs::relative(e.path(), a.str());
    std::ifstream fa(e.path()), fb(fs::path(b.str()) / rel);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    EXPECT_EQ(sa.str(), sb.str()) << rel;
  }
}

TEST(Mutate, ZeroRatioReplacesNothing) {
  testing::TempDir dir("m0");
  const BenchmarkInstance inst = mutate(testing::shared_corpus(), {0, 1, {}}, dir.str());
  for (const auto& db : inst.manifest.databases) {
    EXPECT_EQ(db.replaced_count(), 0u);
    EXPECT_TRUE(inst.mappings(db.db_id).empty());
  }
  EXPECT_THROW(mutate(testing::shared_corpus(), {0, 1, {"no_such_db"}}, dir.sub("x")), BenchmarkError);
}

// Brute-force oracle: filter rows of the original table by typed equality,
// using the engine's own comparison.
TEST(FixtureStore, FilterAgreesWithEngine) {
  auto& s = served();
  const FixtureStore& store = s.server->store();
  Database original = Database::open(s.inst.original_db("museum_visit"));
  std::mt19937 rng(23);
  const auto schema = s.inst.schema("museum_visit");
  for (int iter = 0; iter < 200; ++iter) {
    const auto& e = schema.entities[rng() % schema.entities.size()];
    const ResultTable rows = original.query("SELECT * FROM " + e.name);
    std::vector<std::pair<std::string, std::string>> params;
    const int n = static_cast<int>(rng() % 3);
    for (int k = 0; k < n; ++k) {
      const std::size_t ci = rng() % e.attributes.size();
      const Value& v = rows.rows[rng() % rows.rows.size()][ci];
      if (is_null(v)) continue;
      const std::string raw = value_to_display(v);
      params.push_back({e.attributes[ci].name, raw});
    }
    std::string sql = "SELECT * FROM " + e.name + " WHERE 1";
    for (const auto& [name, raw] : params) {
      const auto* a = e.find_attribute(name);
      sql += " AND " + name + " = " +
             (a->value_type == ValueType::text ? text::sql_quote(raw) : raw);
    }
    const auto got = store.filter("museum_visit", e.name, params);
    ASSERT_TRUE(got);
    ResultTable gt{rows.columns, *got};
    EXPECT_TRUE(compare_result_sets(gt, original.query(sql), false)) << sql;
  }
}

TEST(FixtureStore, HttpStatuses) {
  auto& s = served();
  const FixtureStore& store = s.server->store();
  EXPECT_EQ(store.handle("/museum_visit/museum", {}).status, 200);
  EXPECT_EQ(store.handle("/museum", {}).status, 200);
  EXPECT_EQ(store.handle("/museum_visit/nope", {}).status, 404);
  EXPECT_EQ(store.handle("/other/museum", {}).status, 404);
  EXPECT_EQ(store.handle("/a/b/c", {}).status, 404);
  const auto bad = store.handle("/museum_visit/museum", {{"nme", "x"}});
  EXPECT_EQ(bad.status, 400);
  EXPECT_NE(bad.body.find("nme"), std::string::npos);
  const auto one = store.handle("/museum_visit/museum", {{"Name", "Plaza Museum"}});
  EXPECT_EQ(nlohmann::json::parse(one.body).size(), 1u);
  EXPECT_EQ(nlohmann::json::parse(store.handle("/museum_visit/museum", {{"Num_of_Staff", "abc"}}).body).size(), 0u);
}

ResultTable table(std::vector<Row> rows) { return {{"a", "b"}, std::move(rows)}; }

TEST(CompareResultSets, Semantics) {
  const Value one{std::int64_t{1}}, two{std::int64_t{2}}, null{};
  EXPECT_TRUE(compare_result_sets(table({{one, two}, {two, one}}), table({{two, one}, {one, two}}), false));
  EXPECT_FALSE(compare_result_sets(table({{one, two}, {two, one}}), table({{two, one}, {one, two}}), true));
  EXPECT_FALSE(compare_result_sets(table({{one, two}}), table({{one, two}, {one, two}}), false));
  EXPECT_FALSE(compare_result_sets(table({{one, two}, {one, two}}), table({{one, two}, {two, two}}), false));
  EXPECT_TRUE(compare_result_sets(table({{null, one}}), table({{null, one}}), false));
  EXPECT_FALSE(compare_result_sets(table({{null, one}}), table({{Value{std::string("")}, one}}), false));
  EXPECT_TRUE(compare_result_sets(table({{Value{1.0}, one}}), table({{Value{1.0 + 5e-7}, one}}), false));
  EXPECT_FALSE(compare_result_sets(table({{Value{1.0}, one}}), table({{Value{1.0 + 5e-6}, one}}), false));
  EXPECT_TRUE(values_equal(Value{std::int64_t{3}}, Value{3.0}));
  EXPECT_FALSE(compare_result_sets({{"a"}, {{one}}}, table({{one, two}}), false));
  // Column names do not matter.
  EXPECT_TRUE(compare_result_sets({{"x", "y"}, {{one, two}}}, table({{one, two}}), false));
}

TEST(Evaluate, GoldIsPerfectAndExtraRowIsWrong) {
  auto& s = served();
  const Corpus& c = testing::shared_corpus();
  Predictions p = gold_predictions(c, s.inst.manifest);
  const EvalReport gold = evaluate(p, c, s.inst, s.server->origin());
  EXPECT_EQ(gold.overall().correct, gold.overall().total);
  EXPECT_EQ(gold.overall().total, c.questions_for("museum_visit").size());

  const Question* q = c.questions_for("museum_visit").front();
  p[q->id] = sql::render(sql::parse(q->query)) + " UNION ALL " + sql::render(sql::parse(q->query));
  p.erase(c.questions_for("museum_visit").back()->id);
  const EvalReport bad = evaluate(p, c, s.inst, s.server->origin());
  EXPECT_EQ(bad.overall().correct, gold.overall().total - 2);
  const auto table_text = format_report_table({gold, bad});
  EXPECT_NE(table_text.find("overall"), std::string::npos);
  EXPECT_EQ(bad.to_json()["verdicts"].size(), gold.overall().total);
}

TEST(Hardness, ReferenceExamples) {
  auto h = [](const char* q) { return hardness(sql::parse(q)); };
  EXPECT_EQ(h("SELECT count(*) FROM singer"), "easy");
  EXPECT_EQ(h("SELECT name, country, age FROM singer ORDER BY age DESC"), "medium");
  EXPECT_EQ(h("SELECT avg(age), min(age), max(age) FROM singer WHERE country = 'France'"), "medium");
  EXPECT_EQ(h("SELECT T2.name, count(*) FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id "
              "GROUP BY T1.stadium_id"),
            "medium");
  EXPECT_EQ(h("SELECT song_name FROM singer WHERE age > (SELECT avg(age) FROM singer)"), "hard");
  EXPECT_EQ(h("SELECT name FROM stadium WHERE stadium_id NOT IN (SELECT stadium_id FROM concert)"), "hard");
  EXPECT_EQ(h("SELECT country FROM singer WHERE age > 40 INTERSECT SELECT country FROM singer WHERE age < 30"),
            "hard");
  EXPECT_EQ(h("SELECT T2.name, T2.capacity FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = "
              "T2.stadium_id WHERE T1.year >= 2014 GROUP BY T2.stadium_id ORDER BY count(*) DESC LIMIT 1"),
            "extra");
}

}  // namespace
}  // namespace hetfed
