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

#include <random>

#include "hetfed/benchmark.h"
#include "hetfed/error.h"
#include "hetfed/rewriter.h"
#include "hetfed/sql/parser.h"
#include "hetfed/sqlite.h"
#include "hetfed/text.h"
#include "test_support.h"

namespace hetfed {
namespace {

using sql::Literal;
using sql::parse;

const char* kPlaza = "SELECT Num_of_Staff , Open_Year FROM museum WHERE name = 'Plaza Museum'";

TEST(Rewrite, PlazaMuseumPushesName) {
  const RewrittenQuery rq = rewrite(parse(kPlaza), testing::museum_view(true));
  ASSERT_EQ(rq.occurrences.size(), 1u);
  const auto& o = rq.occurrences[0];
  EXPECT_EQ(o.udf_name, "api_museum");
  EXPECT_EQ(o.table, "museum");
  ASSERT_EQ(o.pushed.size(), 1u);
  EXPECT_EQ(o.pushed[0].param, "Name");
  EXPECT_EQ(o.pushed[0].value, Literal::string("Plaza Museum"));
  EXPECT_TRUE(o.residual.empty());
  EXPECT_EQ(rq.sql(), "SELECT Num_of_Staff, Open_Year FROM api_museum(Name := 'Plaza Museum') AS museum");
  EXPECT_EQ(rq.sql(sql::Dialect::engine),
            "SELECT Num_of_Staff, Open_Year FROM api_museum(0, 'Name', 'Plaza Museum') AS museum");
}

TEST(Rewrite, IdentityWithoutVirtualTables) {
  const Corpus& c = testing::shared_corpus();
  for (const auto& db : c.db_ids) {
    Database d = Database::open(c.db_path(db));
    const TableView view = generate_table_view(derive_abstract_from_db(d.schema_dump()), {});
    for (const Question* q : c.questions_for(db)) {
      const auto ast = parse(q->query);
      const RewrittenQuery rq = rewrite(ast, view);
      EXPECT_EQ(rq.ast, ast) << q->id;
      EXPECT_TRUE(rq.occurrences.empty());
      EXPECT_EQ(rq.sql(), sql::render(ast)) << q->id;
    }
  }
}

TEST(Rewrite, BaseOnlyQueryUnchangedInMixedView) {
  const auto ast = parse("SELECT count(*) FROM visitor WHERE age > 30");
  EXPECT_EQ(rewrite(ast, testing::museum_view(true)).ast, ast);
}

TEST(Rewrite, JoinOnVirtualTableIsFullFetch) {
  const RewrittenQuery rq = rewrite(
      parse("SELECT t2.Num_of_Ticket FROM museum AS t1 JOIN visit AS t2 ON t1.Museum_ID = t2.Museum_ID"),
      testing::museum_view(true));
  ASSERT_EQ(rq.occurrences.size(), 1u);
  EXPECT_TRUE(rq.occurrences[0].full_fetch());
  EXPECT_EQ(rq.occurrences[0].exposed, "t1");
  EXPECT_EQ(rq.sql(), "SELECT t2.Num_of_Ticket FROM api_museum() AS t1 JOIN visit AS t2 ON t1.Museum_ID = t2.Museum_ID");
}

TEST(Rewrite, OnlyTopLevelLiteralEqualitiesArePushed) {
  const RewrittenQuery rq =
      rewrite(parse("SELECT name FROM museum WHERE num_of_staff > 10 AND (name = 'a' OR name = 'b') AND "
                    "name LIKE 'P%' AND open_year = 2010 AND museum_id = num_of_staff"),
              testing::museum_view(true));
  const auto& o = rq.occurrences.at(0);
  ASSERT_EQ(o.pushed.size(), 1u);
  EXPECT_EQ(o.pushed[0].param, "Open_Year");
  EXPECT_EQ(o.pushed[0].value, Literal::string("2010"));
  EXPECT_EQ(o.residual.size(), 3u);
  EXPECT_EQ(rq.sql(),
            "SELECT name FROM api_museum(Open_Year := '2010') AS museum WHERE num_of_staff > 10 AND (name = 'a' OR "
            "name = 'b') AND name LIKE 'P%' AND museum_id = num_of_staff");
}

TEST(Rewrite, NoPushdownAcrossSubqueryBoundary) {
  const RewrittenQuery rq = rewrite(
      parse("SELECT name FROM visitor WHERE id IN (SELECT t2.visitor_id FROM visit AS t2 JOIN museum AS t1 ON "
            "t1.museum_id = t2.museum_id WHERE t1.name = 'x') AND name = 'y'"),
      testing::museum_view(true));
  ASSERT_EQ(rq.occurrences.size(), 1u);
  ASSERT_EQ(rq.occurrences[0].pushed.size(), 1u);
  EXPECT_EQ(rq.occurrences[0].pushed[0].param, "Name");
  EXPECT_EQ(rq.occurrences[0].pushed[0].value, Literal::string("x"));
  EXPECT_NE(rq.sql().find("AND name = 'y'"), std::string::npos);
}

TEST(Rewrite, LeftJoinNullableSideStaysResidual) {
  const RewrittenQuery rq =
      rewrite(parse("SELECT v.visitor_id FROM visit AS v LEFT JOIN museum AS m ON v.museum_id = m.museum_id WHERE "
                    "m.name = 'x'"),
              testing::museum_view(true));
  ASSERT_EQ(rq.occurrences.size(), 1u);
  EXPECT_TRUE(rq.occurrences[0].full_fetch());
  EXPECT_EQ(rq.occurrences[0].residual.size(), 1u);
}

TEST(Rewrite, ExplicitArgumentsAreCoerced) {
  const RewrittenQuery rq =
      rewrite(parse("SELECT * FROM api_museum(Open_Year := 2008) WHERE name = 'x'"), testing::museum_view(true));
  ASSERT_EQ(rq.occurrences.size(), 1u);
  ASSERT_EQ(rq.occurrences[0].pushed.size(), 2u);
  EXPECT_EQ(rq.occurrences[0].pushed[0].value, Literal::string("2008"));
}

TEST(Rewrite, Errors) {
  const TableView v = testing::museum_view(true);
  EXPECT_THROW(rewrite(parse("SELECT * FROM musem"), v), RewriteError);
  EXPECT_THROW(rewrite(parse("SELECT nme FROM museum"), v), RewriteError);
  EXPECT_THROW(rewrite(parse("SELECT * FROM museum WHERE num_of_staff = 'many'"), v), RewriteError);
  EXPECT_THROW(rewrite(parse("SELECT * FROM api_museum(nme := 'x')"), v), RewriteError);
  EXPECT_THROW(rewrite(parse("SELECT * FROM api_museum(Num_of_Staff := 'x')"), v), RewriteError);
}

sql::Predicate eq_pred(const std::string& col, Literal lit) {
  sql::Predicate p;
  p.column.name = col;
  p.literal = lit;
  return p;
}

TEST(BindArguments, TwoParameters) {
  const std::vector<ApiParam> params{{"a", ValueType::integer, false}, {"b", ValueType::text, false}};
  const auto r = bind_arguments({eq_pred("a", Literal::integer(1)), eq_pred("b", Literal::string("x"))}, params);
  ASSERT_EQ(r.pushed.size(), 2u);
  EXPECT_EQ(r.pushed[0].param, "a");
  EXPECT_EQ(r.pushed[1].value, Literal::string("x"));
  EXPECT_TRUE(r.residual.empty());
}

TEST(BindArguments, EmptyIsFullFetch) {
  const auto r = bind_arguments({}, std::vector<ApiParam>{{"a", ValueType::integer, false}});
  EXPECT_TRUE(r.pushed.empty());
  EXPECT_TRUE(r.residual.empty());
}

TEST(BindArguments, InequalityNullAndConflictsStayResidual) {
  const std::vector<ApiParam> params{{"a", ValueType::integer, false}};
  auto gt = eq_pred("a", Literal::integer(5));
  gt.op = sql::PredicateOp::gt;
  auto r = bind_arguments({gt}, params);
  EXPECT_TRUE(r.pushed.empty());
  EXPECT_EQ(r.residual.size(), 1u);
  r = bind_arguments({eq_pred("a", Literal{})}, params);
  EXPECT_TRUE(r.pushed.empty());
  r = bind_arguments({eq_pred("a", Literal::integer(1)), eq_pred("a", Literal::integer(2))}, params);
  EXPECT_TRUE(r.pushed.empty());
  EXPECT_EQ(r.residual.size(), 2u);
  r = bind_arguments({eq_pred("a", Literal::integer(1)), eq_pred("A", Literal::string("1"))}, params);
  ASSERT_EQ(r.pushed.size(), 1u);
  EXPECT_TRUE(r.residual.empty());
  r = bind_arguments({eq_pred("a", Literal::string("one"))}, params);
  EXPECT_TRUE(r.pushed.empty());
  EXPECT_EQ(r.mismatched.size(), 1u);
}

// Compares each coercion with the engine's own comparison against a typed
// column: `col = lit` must hold exactly for the coerced value.
TEST(CoerceLiteral, AgreesWithEngineAffinity) {
  Database db = Database::in_memory();
  db.exec("CREATE TABLE t (i INTEGER, r REAL, s TEXT)");
  const std::vector<Literal> lits{
      Literal::integer(2000), Literal::integer(-3), Literal{Literal::Kind::real, "2.0"},
      Literal{Literal::Kind::real, "2.5"}, Literal::string("2000"), Literal::string("2.5"), Literal::string("abc"),
      Literal::string(" 7"), Literal{Literal::Kind::real, "1e3"}};
  const std::vector<std::pair<std::string, ValueType>> cols{
      {"i", ValueType::integer}, {"r", ValueType::real}, {"s", ValueType::text}};
  for (const auto& [col, type] : cols) {
    for (const auto& lit : lits) {
      auto c = coerce_literal(lit, type);
      if (!c) continue;
      db.exec("DELETE FROM t");
      db.exec("INSERT INTO t (" + col + ") VALUES (" + sql::render(sql::Expr{*c, {}}) + ")");
      const auto hit = db.query("SELECT count(*) FROM t WHERE " + col + " = " + sql::render(sql::Expr{lit, {}}));
      EXPECT_EQ(std::get<std::int64_t>(hit.rows[0][0]), 1) << col << " " << lit.raw << " -> " << c->raw;
      const auto type_check = db.query("SELECT typeof(" + col + ") FROM t");
      const std::string expected = type == ValueType::integer ? "integer" : type == ValueType::real ? "real" : "text";
      EXPECT_EQ(std::get<std::string>(type_check.rows[0][0]), expected) << c->raw;
    }
  }
  EXPECT_EQ(coerce_literal(Literal::integer(2000), ValueType::text), Literal::string("2000"));
  EXPECT_FALSE(coerce_literal(Literal{Literal::Kind::real, "2.5"}, ValueType::integer));
  EXPECT_FALSE(coerce_literal(Literal::string("abc"), ValueType::integer));
  EXPECT_FALSE(coerce_literal(Literal::integer(2), ValueType::boolean));
}

// Conjunct conservation: pushed equalities AND residual conjuncts select the
// same museum rows as the original WHERE.
TEST(Rewrite, ConjunctConservationOnMuseumRows) {
  const Corpus& c = testing::shared_corpus();
  Database db = Database::open(c.db_path("museum_visit"));
  const auto rows = db.query("SELECT Museum_ID, Name, Num_of_Staff, Open_Year FROM museum");
  const TableView view = testing::museum_view(true);
  std::mt19937 rng(17);
  const std::vector<std::string> cols{"Museum_ID", "Name", "Num_of_Staff", "Open_Year"};
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::string> conj;
    const int n = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < n; ++k) {
      const std::size_t ci = rng() % cols.size();
      const auto& row = rows.rows[rng() % rows.rows.size()];
      std::string lit;
      if (const auto* i = std::get_if<std::int64_t>(&row[ci]))
        lit = rng() % 3 == 0 ? "'" + std::to_string(*i) + "'" : std::to_string(*i + static_cast<int>(rng() % 2));
      else if (const auto* s = std::get_if<std::string>(&row[ci]))
        lit = text::sql_quote(*s);
      else
        lit = "NULL";
      const char* ops[] = {" = ", " = ", " >= ", " <> "};
      conj.push_back(cols[ci] + ops[rng() % 4] + lit);
    }
    std::string where;
    for (std::size_t k = 0; k < conj.size(); ++k) where += (k ? " AND " : "") + conj[k];
    RewrittenQuery rq;
    try {
      rq = rewrite(parse("SELECT * FROM museum WHERE " + where), view);
    } catch (const RewriteError&) {
      continue;
    }
    std::vector<std::string> parts;
    for (const auto& a : rq.occurrences.at(0).pushed) parts.push_back(a.param + " = " + sql::render(sql::Expr{a.value, {}}));
    for (const auto& p : rq.occurrences.at(0).residual) parts.push_back(sql::render(p.conjunct));
    std::string rebuilt = "1";
    for (const auto& p : parts) rebuilt += " AND " + p;
    EXPECT_TRUE(compare_result_sets(db.query("SELECT * FROM museum WHERE " + where),
                                    db.query("SELECT * FROM museum WHERE " + rebuilt), false))
        << where << " vs " << rebuilt;
  }
}

}  // namespace
}  // namespace hetfed
