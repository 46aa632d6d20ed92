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

#include "hetfed/benchmark.h"
#include "hetfed/error.h"
#include "hetfed/federation.h"
#include "hetfed/rewriter.h"
#include "hetfed/sql/parser.h"
#include "hetfed/sqlite.h"
#include "test_support.h"

namespace hetfed {
namespace {

using testing::served;

TEST(Federation, PlazaMuseumMatchesOriginal) {
  auto& s = served();
  const char* q = "SELECT Num_of_Staff, Open_Year FROM museum WHERE name = 'Plaza Museum'";
  FederationSession session(s.ctx());
  const ResultTable r = session.execute(rewrite(sql::parse(q), s.view()));
  EXPECT_EQ(r.columns, (std::vector<std::string>{"Num_of_Staff", "Open_Year"}));
  EXPECT_TRUE(compare_result_sets(r, s.original(q), false));
  ASSERT_EQ(session.api_calls().size(), 1u);
  EXPECT_EQ(session.api_calls()[0].args.size(), 1u);
}

TEST(Federation, OneCallPerOccurrence) {
  auto& s = served();
  const char* q =
      "SELECT count(*) FROM visit AS a JOIN visit AS b ON a.museum_id = b.museum_id WHERE a.num_of_ticket > 1";
  FederationSession session(s.ctx());
  const ResultTable r = session.execute(rewrite(sql::parse(q), s.view()));
  EXPECT_TRUE(compare_result_sets(r, s.original(q), false));
  ASSERT_EQ(session.api_calls().size(), 2u);
  EXPECT_EQ(session.api_calls()[0].occurrence, 0);
  EXPECT_EQ(session.api_calls()[1].occurrence, 1);
}

TEST(Federation, SubqueryOccurrencesAgreeWithOriginal) {
  auto& s = served();
  const char* q =
      "SELECT name FROM visitor WHERE id NOT IN (SELECT t2.visitor_id FROM museum AS t1 JOIN visit AS t2 ON "
      "t1.Museum_ID = t2.Museum_ID WHERE t1.open_year > 2010) ORDER BY name";
  FederationSession session(s.ctx());
  EXPECT_TRUE(compare_result_sets(session.execute(rewrite(sql::parse(q), s.view())), s.original(q), true));
  EXPECT_EQ(session.api_calls().size(), 3u);
}

TEST(Federation, SelectWithoutTables) {
  auto& s = served();
  FederationSession session(s.ctx());
  const ResultTable r = session.execute(rewrite(sql::parse("SELECT 1"), s.view()));
  EXPECT_EQ(r.columns, std::vector<std::string>{"?column?"});
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0][0], Value{std::int64_t{1}});
  EXPECT_TRUE(session.api_calls().empty());
}

TEST(Federation, MaterializeZeroRows) {
  auto& s = served();
  FederationSession session(s.ctx());
  const auto [name, n] =
      session.materialize_temp(rewrite(sql::parse("SELECT name FROM museum WHERE name = 'Nowhere'"), s.view()));
  EXPECT_EQ(name, "tmp_step_1");
  EXPECT_EQ(n, 0u);
  const auto temps = session.temp_tables();
  ASSERT_EQ(temps.size(), 1u);
  EXPECT_EQ(temps[0].columns.size(), 1u);
  EXPECT_EQ(session.execute_sql("SELECT count(*) FROM tmp_step_1").rows[0][0], Value{std::int64_t{0}});
  const auto [name2, n2] = session.materialize_temp(rewrite(sql::parse("SELECT * FROM visitor"), s.view()));
  EXPECT_EQ(name2, "tmp_step_2");
  EXPECT_EQ(n2, std::get<std::int64_t>(s.original("SELECT count(*) FROM visitor").rows[0][0]));
}

TEST(Federation, TraceHoldsNoCellValues) {
  auto& s = served();
  FederationSession session(s.ctx());
  session.execute(rewrite(sql::parse("SELECT * FROM museum WHERE name = 'Plaza Museum'"), s.view()));
  session.materialize_temp(rewrite(sql::parse("SELECT name, age FROM visitor"), s.view()));
  const std::string trace = session.trace().serialize();
  EXPECT_FALSE(session.trace().steps.empty());
  for (const char* table : {"museum", "visitor"}) {
    for (const auto& row : s.original(std::string("SELECT * FROM ") + table).rows)
      for (const auto& v : row)
        if (const auto* str = std::get_if<std::string>(&v)) {
          if (str->size() >= 4) EXPECT_EQ(trace.find(*str), std::string::npos) << *str;
        }
  }
}

TEST(RequestTarget, EncodesArguments) {
  ApiMapping m;
  m.entity_name = "museum";
  m.url = "http://127.0.0.1:8080/museum_visit/museum";
  m.input_params = {{"Name", ValueType::text, false}, {"Num_of_Staff", ValueType::integer, false}};
  const std::vector<ArgBinding> args{{"name", sql::Literal::string("Plaza & Co/2"), {}},
                                     {"Num_of_Staff", sql::Literal::integer(12), {}}};
  EXPECT_EQ(request_target(m.url, m, args), "/museum_visit/museum?Name=Plaza%20%26%20Co%2F2&Num_of_Staff=12");
  EXPECT_EQ(request_target(m.url, m, {}), "/museum_visit/museum");
}

TEST(CallApi, ErrorsAreExecErrors) {
  auto& s = served();
  ExecContext ctx = s.ctx();
  ApiMapping m = s.inst.mappings("museum_visit").at(0);
  EXPECT_THROW(call_api(m, {{"nope", sql::Literal::integer(1), {}}}, ctx), ExecError);
  m.url = "http://127.0.0.1:8080/museum_visit/missing";
  ctx.base_url_overrides.clear();
  ctx.base_url_overrides[m.entity_name] = s.server->origin() + "/museum_visit/missing";
  EXPECT_THROW(call_api(m, {}, ctx), ExecError);
  ctx.base_url_overrides[m.entity_name] = "http://127.0.0.1:1/museum_visit/museum";
  ctx.http_timeout = std::chrono::milliseconds(500);
  EXPECT_THROW(call_api(m, {}, ctx), ExecError);
}

}  // namespace
}  // namespace hetfed
