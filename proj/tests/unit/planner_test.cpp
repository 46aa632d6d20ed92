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

#include "hetfed/error.h"
#include "hetfed/planner.h"
#include "test_support.h"

namespace hetfed {
namespace {

using testing::served;

std::map<std::string, std::string> all_vars() {
  std::map<std::string, std::string> vars;
  for (const auto& p : PromptTemplate::placeholders()) vars[p] = "<" + p + ">";
  return vars;
}

TEST(PromptTemplate, FillSubstitutesOnce) {
  EXPECT_EQ(PromptTemplate::fill("a {x} b {y}", {{"x", "{y}"}, {"y", "2"}}), "a {y} b 2");
  EXPECT_EQ(PromptTemplate::fill("json {\"k\": 1}", {}), "json {\"k\": 1}");
  EXPECT_THROW(PromptTemplate::fill("Question: {user_input}", {}), PlannerError);
}

TEST(PromptTemplate, DefaultsUseEveryPlaceholder) {
  const PromptTemplate t = PromptTemplate::defaults();
  const std::string all = t.prefix + t.format_instructions + t.suffix;
  for (const char* p : {"dialect", "materialized_tables", "tool_descriptions", "tool_names", "user_input",
                        "model_answer_prefix", "agent_scratchpad"})
    EXPECT_NE(all.find(std::string("{") + p + "}"), std::string::npos) << p;
  const std::string rendered = t.render(all_vars());
  EXPECT_EQ(rendered.find("{user_input}"), std::string::npos);
  EXPECT_NE(rendered.find("<user_input>"), std::string::npos);
}

TEST(PromptTemplate, LoadMatchesShippedFiles) {
  const PromptTemplate loaded = PromptTemplate::load(std::string(HETFED_SOURCE_DIR) + "/prompts");
  const PromptTemplate builtin = PromptTemplate::defaults();
  EXPECT_EQ(loaded.prefix, builtin.prefix);
  EXPECT_EQ(loaded.format_instructions, builtin.format_instructions);
  EXPECT_EQ(loaded.suffix, builtin.suffix);
  EXPECT_EQ(loaded.table_selector, builtin.table_selector);
}

TEST(ParseStep, ActionAndFinalAnswer) {
  const auto a = parse_step(
      " I should look at the tables.\nAction: sql_db_list_tables\nAction Input: \nObservation: museum\nThought: x");
  EXPECT_EQ(a.thought, "I should look at the tables.");
  EXPECT_EQ(a.action, "sql_db_list_tables");
  EXPECT_EQ(a.action_input, "");
  EXPECT_TRUE(a.well_formed());
  const auto f = parse_step("I know.\nFinal Answer: SELECT 1");
  EXPECT_EQ(f.final_answer, "SELECT 1");
  EXPECT_TRUE(f.well_formed());
  EXPECT_FALSE(parse_step("just chatting").well_formed());
  EXPECT_FALSE(parse_step("Action: sql_db_query").well_formed());
}

TEST(ScriptedEndpoint, SplitsOnSeparatorLines) {
  auto e = ScriptedEndpoint::from_text("one\nline\n---\ntwo\n");
  EXPECT_EQ(e.remaining(), 2u);
  EXPECT_EQ(e.complete("p1"), "one\nline\n");
  EXPECT_EQ(e.complete("p2"), "two\n");
  EXPECT_THROW(e.complete("p3"), PlannerError);
  EXPECT_EQ(e.prompts().size(), 3u);
}

TEST(ReactLoop, HintThenAnswer) {
  auto& s = served();
  FederationSession session(s.ctx());
  Toolbox tools(s.view(), session);
  ScriptedEndpoint model({
      "I need the staff count.\nAction: sql_db_query\nAction Input: SELECT staff_num FROM museum WHERE name = "
      "'Plaza Museum'",
      "Fix the column.\nAction: sql_db_query\nAction Input: SELECT Num_of_Staff FROM museum WHERE name = 'Plaza "
      "Museum'",
  });
  const PlannerResult r = react_loop("How many staff does Plaza Museum have?", tools, model,
                                     PromptTemplate::defaults());
  EXPECT_EQ(r.status, PlannerStatus::answered);
  EXPECT_EQ(r.model_calls, 2u);
  ASSERT_EQ(r.steps.size(), 2u);
  EXPECT_NE(r.steps[0].observation.find("did you mean 'Num_of_Staff'"), std::string::npos);
  EXPECT_EQ(r.final_sql, "SELECT Num_of_Staff FROM museum WHERE name = 'Plaza Museum'");
  EXPECT_EQ(tools.engine_calls(), 1u);
  ASSERT_TRUE(r.result);
  EXPECT_TRUE(compare_result_sets(*r.result, s.original(r.final_sql), false));
  // The second prompt carries the first observation.
  EXPECT_NE(model.prompts()[1].find("did you mean 'Num_of_Staff'"), std::string::npos);
  EXPECT_EQ(r.steps[1].observation.find("Plaza"), std::string::npos);
}

TEST(ReactLoop, MaterializeThenFinalAnswer) {
  auto& s = served();
  FederationSession session(s.ctx());
  Toolbox tools(s.view(), session);
  ScriptedEndpoint model({
      "Stage it.\nAction: sql_db_materialize\nAction Input: SELECT Museum_ID FROM museum WHERE Open_Year > 2010",
      "Done.\nFinal Answer: SELECT count(*) FROM tmp_step_1",
  });
  std::vector<std::string> prompts;
  ReactOptions opts;
  opts.on_prompt = [&](const std::string& p) { prompts.push_back(p); };
  const PlannerResult r = react_loop("q", tools, model, PromptTemplate::defaults(), opts);
  EXPECT_EQ(r.status, PlannerStatus::answered);
  EXPECT_NE(r.steps[0].observation.find("in tmp_step_1 with columns [Museum_ID]"), std::string::npos);
  ASSERT_EQ(prompts.size(), 2u);
  EXPECT_NE(prompts[0].find("none yet"), std::string::npos);
  EXPECT_NE(prompts[1].find("tmp_step_1"), std::string::npos);
  EXPECT_EQ(tools.materialized_tables(), std::vector<std::string>{"tmp_step_1"});
  EXPECT_TRUE(compare_result_sets(
      *r.result, s.original("SELECT count(*) FROM museum WHERE Open_Year > 2010"), false));
}

TEST(ReactLoop, StepLimit) {
  auto& s = served();
  FederationSession session(s.ctx());
  Toolbox tools(s.view(), session);
  std::vector<std::string> replies(10, "Look.\nAction: sql_db_list_tables\nAction Input: ");
  ScriptedEndpoint model(replies);
  ReactOptions opts;
  opts.max_steps = 4;
  const PlannerResult r = react_loop("q", tools, model, PromptTemplate::defaults(), opts);
  EXPECT_EQ(r.status, PlannerStatus::step_limit);
  EXPECT_EQ(r.model_calls, 4u);
  EXPECT_EQ(r.steps.size(), 4u);
  EXPECT_EQ(r.steps[0].observation, "museum, visitor, visit");
}

TEST(ReactLoop, MalformedRepliesGiveUpAfterOneRetry) {
  auto& s = served();
  FederationSession session(s.ctx());
  Toolbox tools(s.view(), session);
  ScriptedEndpoint model({"hmm", "still nothing", "Final Answer: SELECT 1"});
  const PlannerResult r = react_loop("q", tools, model, PromptTemplate::defaults());
  EXPECT_EQ(r.status, PlannerStatus::gave_up);
  EXPECT_EQ(r.model_calls, 2u);
  EXPECT_EQ(model.remaining(), 1u);

  ScriptedEndpoint recovers({"hmm", "Ok.\nFinal Answer: SELECT 1"});
  const PlannerResult r2 = react_loop("q", tools, recovers, PromptTemplate::defaults());
  EXPECT_EQ(r2.status, PlannerStatus::answered);
  EXPECT_NE(recovers.prompts()[1], recovers.prompts()[0]);
}

TEST(ReactLoop, UnknownToolAndIDontKnow) {
  auto& s = served();
  FederationSession session(s.ctx());
  Toolbox tools(s.view(), session);
  ScriptedEndpoint model({"x\nAction: web_search\nAction Input: museums", "x\nFinal Answer: I don't know"});
  const PlannerResult r = react_loop("q", tools, model, PromptTemplate::defaults());
  EXPECT_EQ(r.status, PlannerStatus::gave_up);
  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_NE(r.steps[0].observation.find("not a valid tool"), std::string::npos);
}

TEST(Toolbox, GuardrailBlockedInputsNeverReachEngine) {
  auto& s = served();
  FederationSession session(s.ctx());
  Toolbox tools(s.view(), session);
  for (const char* bad : {"SELECT nme FROM museum", "SELECT * FROM musem", "SELEC 1",
                          "SELECT * FROM api_museum(nme := 'x')", "SELECT a.age FROM visitor AS v"}) {
    for (const char* tool : {kCheckerTool, kMaterializeTool, kQueryTool}) {
      const auto o = tools.run(tool, bad);
      EXPECT_TRUE(o.blocked) << bad;
      EXPECT_FALSE(o.result);
    }
  }
  EXPECT_EQ(tools.engine_calls(), 0u);
  EXPECT_TRUE(session.api_calls().empty());
  EXPECT_EQ(tools.run(kCheckerTool, "```sql\nSELECT name FROM museum;\n```").observation, "The query is valid.");
  EXPECT_EQ(tools.engine_calls(), 0u);
}

TEST(Toolbox, SchemaTool) {
  auto& s = served();
  FederationSession session(s.ctx());
  Toolbox tools(s.view(), session);
  const std::string ddl = tools.run(kSchemaTool, "visit").observation;
  EXPECT_NE(ddl.find("CREATE TABLE visit"), std::string::npos);
  EXPECT_NE(ddl.find("PRIMARY KEY (Museum_ID, visitor_ID)"), std::string::npos);
  EXPECT_NE(tools.run(kSchemaTool, "vist").observation.find("did you mean 'visit'"), std::string::npos);
}

TEST(SelectTables, SingleTableSkipsModel) {
  auto s = testing::museum_schema(false);
  s.entities.resize(1);
  s.relationships.clear();
  const TableView view = generate_table_view(s, {});
  ScriptedEndpoint model({});
  EXPECT_EQ(select_tables("q", view, model, PromptTemplate::defaults()), std::vector<std::string>{"museum"});
  EXPECT_TRUE(model.prompts().empty());
}

TEST(SelectTables, KeepsKnownTablesInViewOrder) {
  const TableView view = testing::museum_view(true);
  ScriptedEndpoint model({"`Visit`, museum, bogus", "nothing useful"});
  EXPECT_EQ(select_tables("q", view, model, PromptTemplate::defaults()),
            (std::vector<std::string>{"museum", "visit"}));
  EXPECT_EQ(select_tables("q", view, model, PromptTemplate::defaults()), view.table_names());
}

TEST(GoldReplay, OneStepNoModel) {
  const PlannerResult r = gold_replay("q1", "SELECT 1");
  EXPECT_EQ(r.status, PlannerStatus::answered);
  EXPECT_EQ(r.model_calls, 0u);
  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_EQ(r.final_sql, "SELECT 1");
  EXPECT_EQ(r.to_json()["status"], "answered");
}

TEST(EndpointConfig, EnvOverridesJson) {
  EndpointConfig c;
  c.merge_json({{"url", "http://a"}, {"model", "m1"}, {"timeout_ms", 5000}});
  EXPECT_EQ(c.url, "http://a");
  EXPECT_EQ(c.timeout, std::chrono::seconds(5));
  setenv("HETFED_ENDPOINT_MODEL", "m2", 1);
  c.merge_env();
  unsetenv("HETFED_ENDPOINT_MODEL");
  EXPECT_EQ(c.model, "m2");
  EXPECT_EQ(c.url, "http://a");
}

}  // namespace
}  // namespace hetfed
