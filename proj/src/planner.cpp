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
#include "hetfed/planner.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "hetfed/error.h"
#include "hetfed/guardrails.h"
#include "hetfed/rewriter.h"
#include "hetfed/sql/parser.h"
#include "hetfed/text.h"
#include "httplib.h"

namespace hetfed {

namespace {

const char* kDefaultPrefix =
    R"(You answer questions by writing {dialect} queries against a relational view in which every data source, stored table or web API, appears as a table.
Select only the columns the question needs rather than every column of a table.
Use only the tools listed below and build the final query only from what they report.
When a tool returns an error or a hint, fix the query and try again.
Never issue statements that change data (INSERT, UPDATE, DELETE, DROP, CREATE and the like).
The tables [{materialized_tables}] are produced by tool calls; populate each one with the tool that creates it before you use it.
If the question has nothing to do with this database, give "I don't know" as the final answer.

Tools:

{tool_descriptions}

Relevant tables:

{table_info}
)";

const char* kDefaultFormat = R"(Reply in this format:

Question: the question to answer
Thought: a short note on what to do next
Action: the tool to use, one of [{tool_names}]
Action Input: the input for the tool
Observation: what the tool returned
... (Thought, Action, Action Input and Observation may repeat)
Thought: I am ready to run the final query
Action: sql_db_query
Action Input: the final query, whose result answers the question
Observation: what the query returned
Thought: I know the final answer
Final Answer: the final SQL query

Write one Thought, Action and Action Input per reply and then stop; the Observation is filled in for you.
)";

const char* kDefaultSuffix = R"(Question: {user_input}
{model_answer_prefix}{agent_scratchpad}
)";

const char* kDefaultSelector = R"(Pick the tables needed to answer the question below.

Tables:
{table_list}

Question: {user_input}

Reply with the needed table names separated by commas and nothing else.
)";

const char* kReformatNote =
    "Observation: The reply did not follow the format. Answer with a Thought: line, an Action: line and an "
    "Action Input: line, or with a Final Answer: line.\n";

bool is_placeholder_char(char c) { return std::islower(static_cast<unsigned char>(c)) || c == '_'; }

std::optional<std::string> read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Strips code fences, surrounding quotes and a trailing semicolon.
std::string clean_sql(std::string s) {
  s = text::trim(s);
  if (s.rfind("```", 0) == 0) {
    auto nl = s.find('\n');
    s = nl == std::string::npos ? s.substr(3) : s.substr(nl + 1);
    auto end = s.rfind("```");
    if (end != std::string::npos) s = s.substr(0, end);
    s = text::trim(s);
  }
  while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '`' && s.back() == '`')))
    s = text::trim(s.substr(1, s.size() - 2));
  while (!s.empty() && s.back() == ';') s = text::trim(s.substr(0, s.size() - 1));
  return s;
}

std::string bracket_list(const std::vector<std::string>& names) { return "[" + text::join(names, ", ") + "]"; }

struct Marker {
  const char* label;
  int field;  // 0 thought, 1 action, 2 action input, 3 final answer, 4 observation
};

const Marker kMarkers[] = {
    {"Thought:", 0}, {"Action Input:", 2}, {"Action:", 1}, {"Final Answer:", 3}, {"Observation:", 4},
};

}  // namespace

// ---------------------------------------------------------------------------
// PromptTemplate

const std::vector<std::string>& PromptTemplate::placeholders() {
  static const std::vector<std::string> p{"dialect",      "materialized_tables", "tool_descriptions",
                                          "tool_names",   "user_input",          "model_answer_prefix",
                                          "agent_scratchpad", "table_info",      "table_list"};
  return p;
}

PromptTemplate PromptTemplate::defaults() { return {kDefaultPrefix, kDefaultFormat, kDefaultSuffix, kDefaultSelector}; }

PromptTemplate PromptTemplate::load(const std::string& dir) {
  PromptTemplate t = defaults();
  if (auto s = read_text(dir + "/prefix.txt")) t.prefix = *s;
  if (auto s = read_text(dir + "/format_instructions.txt")) t.format_instructions = *s;
  if (auto s = read_text(dir + "/suffix.txt")) t.suffix = *s;
  if (auto s = read_text(dir + "/table_selector.txt")) t.table_selector = *s;
  return t;
}

std::string PromptTemplate::fill(const std::string& text, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && is_placeholder_char(text[j])) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        const std::string name = text.substr(i + 1, j - i - 1);
        auto it = vars.find(name);
        if (it == vars.end()) throw PlannerError("unresolved prompt placeholder {" + name + "}");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& vars) const {
  return fill(prefix + "\n" + format_instructions + "\n" + suffix, vars);
}

// ---------------------------------------------------------------------------
// Endpoints

void EndpointConfig::merge_json(const nlohmann::json& j) {
  if (!j.is_object()) throw PlannerError("endpoint config must be a JSON object");
  if (j.contains("url")) url = j["url"].get<std::string>();
  if (j.contains("model")) model = j["model"].get<std::string>();
  if (j.contains("api")) api = j["api"].get<std::string>();
  if (j.contains("api_key")) api_key = j["api_key"].get<std::string>();
  if (j.contains("timeout_ms")) timeout = std::chrono::milliseconds(j["timeout_ms"].get<long long>());
  if (j.contains("temperature")) temperature = j["temperature"].get<double>();
  if (j.contains("max_tokens")) max_tokens = j["max_tokens"].get<int>();
}

void EndpointConfig::merge_env() {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("HETFED_ENDPOINT_URL")) url = *v;
  if (auto v = env("HETFED_ENDPOINT_MODEL")) model = *v;
  if (auto v = env("HETFED_ENDPOINT_API")) api = *v;
  if (auto v = env("HETFED_ENDPOINT_API_KEY")) api_key = *v;
  try {
    if (auto v = env("HETFED_ENDPOINT_TIMEOUT"))
      timeout = std::chrono::milliseconds(static_cast<long long>(std::stod(*v) * 1000));
    if (auto v = env("HETFED_ENDPOINT_TEMPERATURE")) temperature = std::stod(*v);
  } catch (const std::exception&) {
    throw PlannerError("malformed numeric endpoint setting in the environment");
  }
}

HttpEndpoint::HttpEndpoint(EndpointConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.url.empty()) throw PlannerError("no completion endpoint URL configured");
  if (cfg_.api != "completions" && cfg_.api != "chat")
    throw PlannerError("endpoint api must be 'completions' or 'chat', not '" + cfg_.api + "'");
}

std::string HttpEndpoint::complete(const std::string& prompt) {
  const auto scheme_end = cfg_.url.find("://");
  if (scheme_end == std::string::npos) throw PlannerError("malformed endpoint URL '" + cfg_.url + "'");
  const auto slash = cfg_.url.find('/', scheme_end + 3);
  const std::string origin = slash == std::string::npos ? cfg_.url : cfg_.url.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : cfg_.url.substr(slash);

  nlohmann::json body;
  if (!cfg_.model.empty()) body["model"] = cfg_.model;
  body["temperature"] = cfg_.temperature;
  body["max_tokens"] = cfg_.max_tokens;
  body["stop"] = {"\nObservation:"};
  if (cfg_.api == "chat")
    body["messages"] = {{{"role", "user"}, {"content", prompt}}};
  else
    body["prompt"] = prompt;

  httplib::Client client(origin);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw PlannerError("completion endpoint is unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) throw PlannerError("completion endpoint returned HTTP " + std::to_string(res->status));
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw PlannerError("completion endpoint returned malformed JSON");
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& c = j["choices"][0];
    if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
    if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
      return c["message"]["content"].get<std::string>();
  }
  for (const char* key : {"text", "completion", "response"})
    if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
  throw PlannerError("completion endpoint response holds no text");
}

ScriptedEndpoint::ScriptedEndpoint(std::vector<std::string> replies) : replies_(std::move(replies)) {}

ScriptedEndpoint ScriptedEndpoint::from_text(const std::string& script) {
  std::vector<std::string> replies;
  std::string cur;
  std::istringstream in(script);
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    if (text::trim(line) == "---") {
      replies.push_back(cur);
      cur.clear();
      any = false;
      continue;
    }
    cur += line + "\n";
    any = true;
  }
  if (any) replies.push_back(cur);
  return ScriptedEndpoint(std::move(replies));
}

std::string ScriptedEndpoint::complete(const std::string& prompt) {
  prompts_.push_back(prompt);
  if (next_ >= replies_.size()) throw PlannerError("scripted endpoint has no replies left");
  return replies_[next_++];
}

std::string complete(const std::string& prompt, CompletionEndpoint& endpoint) { return endpoint.complete(prompt); }

// ---------------------------------------------------------------------------
// Step parsing

ParsedStep parse_step(const std::string& model_text) {
  ParsedStep out;
  std::string fields[4];
  bool seen[4] = {false, false, false, false};
  int current = 0;
  std::istringstream in(model_text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = text::trim(line);
    const Marker* hit = nullptr;
    for (const auto& m : kMarkers)
      if (stripped.rfind(m.label, 0) == 0) {
        hit = &m;
        break;
      }
    if (hit && hit->field == 4) break;
    if (hit) {
      current = hit->field;
      if (seen[current] && current != 0) break;
      seen[current] = true;
      fields[current] = stripped.substr(std::string(hit->label).size());
    } else {
      if (!fields[current].empty() || current == 2 || current == 3) fields[current] += "\n";
      fields[current] += line;
    }
  }
  out.thought = text::trim(fields[0]);
  if (seen[1]) out.action = text::trim(fields[1]);
  if (seen[2]) out.action_input = text::trim(fields[2]);
  if (seen[3]) out.final_answer = text::trim(fields[3]);
  if (out.action && out.action->empty()) out.action.reset();
  return out;
}

// ---------------------------------------------------------------------------
// Tools

Toolbox::Toolbox(TableView view, FederationSession& session) : view_(std::move(view)), session_(&session) {}

std::vector<std::string> Toolbox::names() const {
  return {kListTablesTool, kSchemaTool, kCheckerTool, kMaterializeTool, kQueryTool};
}

bool Toolbox::has(const std::string& name) const {
  const auto n = names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

std::string Toolbox::descriptions() const {
  std::ostringstream out;
  out << kListTablesTool
      << ": Input is an empty string. Output is a comma-separated list of the tables in the view, temp tables "
         "included.\n";
  out << kSchemaTool
      << ": Input is a comma-separated list of table names. Output is the columns of each table and, for tables "
         "served by an API, the columns the API can filter on.\n";
  out << kCheckerTool
      << ": Input is a SQL query. Output says whether the query is valid against the view, with repair hints "
         "when it is not.\n";
  out << kMaterializeTool
      << ": Input is a SQL query. Runs it and stores the result in a new temp table; output is the table name, "
         "its columns and its row count.\n";
  out << kQueryTool
      << ": Input is a SQL query. Runs it and reports the columns and row count of the result. Use it for the "
         "final query.";
  return out.str();
}

TableView Toolbox::current_view() const {
  TableView v = view_;
  for (auto& t : session_->temp_tables()) v.tables.push_back(std::move(t));
  return v;
}

std::vector<std::string> Toolbox::materialized_tables() const {
  std::vector<std::string> out;
  for (const auto& t : session_->temp_tables()) out.push_back(t.name);
  return out;
}

std::string Toolbox::schema_text(const std::vector<std::string>& tables) const {
  const TableView v = current_view();
  std::ostringstream out;
  bool first = true;
  for (const auto& t : v.tables) {
    if (!tables.empty() &&
        std::none_of(tables.begin(), tables.end(), [&](const std::string& n) { return text::iequals(n, t.name); }))
      continue;
    if (!first) out << "\n";
    first = false;
    std::vector<std::string> keys;
    for (const auto& c : t.columns)
      if (c.is_primary_key) keys.push_back(c.name);
    std::vector<std::string> lines;
    for (const auto& c : t.columns)
      lines.push_back("  " + c.name + " " + std::string(sql_type_name(c.value_type)) +
                      (c.is_primary_key && keys.size() == 1 ? " PRIMARY KEY" : ""));
    if (keys.size() > 1) lines.push_back("  PRIMARY KEY (" + text::join(keys, ", ") + ")");
    out << "CREATE TABLE " << t.name << " (\n" << text::join(lines, ",\n") << "\n)\n";
    if (t.is_virtual()) {
      std::vector<std::string> params;
      for (const auto& p : t.params) params.push_back(p.name);
      out << "/* " << t.name << " is served by a web API";
      if (!params.empty()) out << "; equality filters on " << text::join(params, ", ") << " are sent to it";
      out << ". */\n";
    }
  }
  return out.str();
}

Toolbox::Outcome Toolbox::run(const std::string& tool, const std::string& input) {
  Outcome out;
  if (tool == kListTablesTool) {
    out.observation = text::join(current_view().table_names(), ", ");
    return out;
  }
  if (tool == kSchemaTool) {
    std::vector<std::string> wanted;
    const TableView v = current_view();
    std::vector<std::string> missing;
    for (auto& part : text::split(input, ',')) {
      std::string name = clean_sql(part);
      if (name.empty()) continue;
      if (!v.find_table(name) && std::none_of(v.tables.begin(), v.tables.end(), [&](const ViewTable& t) {
            return text::iequals(t.name, name);
          }))
        missing.push_back(name);
      wanted.push_back(name);
    }
    if (!missing.empty()) {
      std::vector<std::string> lines;
      for (const auto& m : missing) {
        Violation v2;
        v2.subject = m;
        v2.valid_names = v.table_names();
        v2.candidates = near_misses(m, v2.valid_names);
        lines.push_back(hint_for(v2).text);
      }
      out.observation = text::join(lines, "\n");
      return out;
    }
    out.observation = schema_text(wanted);
    return out;
  }
  if (tool != kCheckerTool && tool != kMaterializeTool && tool != kQueryTool)
    throw PlannerError("unknown tool '" + tool + "'");

  const std::string sql_text = clean_sql(input);
  const TableView v = current_view();
  const CheckOutcome checked = check_sql(sql_text, v);
  if (!checked.ok()) {
    out.blocked = true;
    out.observation = checked.hint_text();
    return out;
  }
  if (tool == kCheckerTool) {
    out.observation = "The query is valid.";
    return out;
  }
  try {
    const RewrittenQuery rq = rewrite(sql::parse(sql_text), v);
    ++engine_calls_;
    if (tool == kMaterializeTool) {
      auto [name, count] = session_->materialize_temp(rq);
      std::vector<std::string> cols;
      for (const auto& t : session_->temp_tables())
        if (t.name == name)
          for (const auto& c : t.columns) cols.push_back(c.name);
      out.observation = "Stored " + std::to_string(count) + " rows in " + name + " with columns " +
                        bracket_list(cols) + ".";
    } else {
      ResultTable r = session_->execute(rq);
      out.observation = "The query returned " + std::to_string(r.row_count()) + " rows with columns " +
                        bracket_list(r.columns) + ".";
      out.result = std::move(r);
    }
  } catch (const Error& e) {
    out.observation = std::string("Error: ") + e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planning

std::string_view status_name(PlannerStatus s) {
  switch (s) {
    case PlannerStatus::answered:
      return "answered";
    case PlannerStatus::gave_up:
      return "gave_up";
    case PlannerStatus::step_limit:
      return "step_limit";
  }
  return "gave_up";
}

nlohmann::ordered_json PlannerResult::to_json() const {
  nlohmann::ordered_json j;
  j["status"] = std::string(status_name(status));
  j["final_sql"] = final_sql;
  j["model_calls"] = model_calls;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : steps)
    j["steps"].push_back({{"thought", s.thought},
                          {"action", s.action},
                          {"action_input", s.action_input},
                          {"observation", s.observation}});
  j["trace"] = trace.to_json();
  return j;
}

std::vector<std::string> select_tables(const std::string& question, const TableView& view,
                                       CompletionEndpoint& endpoint, const PromptTemplate& tmpl) {
  if (view.tables.empty()) throw PlannerError("the view has no tables");
  if (view.tables.size() == 1) return {view.tables.front().name};
  std::ostringstream list;
  for (const auto& t : view.tables) {
    std::vector<std::string> cols;
    for (const auto& c : t.columns) cols.push_back(c.name);
    list << "- " << t.name << ": " << text::join(cols, ", ") << "\n";
  }
  const std::string prompt = PromptTemplate::fill(tmpl.table_selector, {{"table_list", list.str()}, {"user_input", question}});
  const std::string reply = endpoint.complete(prompt);

  std::set<std::string> picked;
  std::string flat = reply;
  std::replace(flat.begin(), flat.end(), '\n', ',');
  for (auto& part : text::split(flat, ',')) {
    std::string name = text::trim(part);
    while (!name.empty() && std::string("`'\"*-. ").find(name.front()) != std::string::npos) name.erase(0, 1);
    while (!name.empty() && std::string("`'\"*. ").find(name.back()) != std::string::npos) name.pop_back();
    for (const auto& t : view.tables)
      if (text::iequals(t.name, name)) picked.insert(t.name);
  }
  std::vector<std::string> out;
  for (const auto& t : view.tables)
    if (picked.count(t.name)) out.push_back(t.name);
  if (out.empty()) return view.table_names();
  return out;
}

PlannerResult react_loop(const std::string& question, Toolbox& tools, CompletionEndpoint& endpoint,
                         const PromptTemplate& tmpl, const ReactOptions& opts) {
  PlannerResult result;
  std::string scratchpad;
  bool retried = false;
  bool finished = false;

  auto record = [&](ReactStep step) {
    scratchpad += "Thought: " + step.thought + "\nAction: " + step.action + "\nAction Input: " + step.action_input +
                  "\nObservation: " + step.observation + "\n";
    result.steps.push_back(std::move(step));
  };

  while (!finished && result.model_calls < static_cast<std::size_t>(std::max(opts.max_steps, 0))) {
    const auto temps = tools.materialized_tables();
    std::vector<std::string> shown = opts.tables;
    if (!shown.empty()) shown.insert(shown.end(), temps.begin(), temps.end());
    std::map<std::string, std::string> vars{
        {"dialect", opts.dialect},
        {"materialized_tables", temps.empty() ? "none yet" : text::join(temps, ", ")},
        {"tool_descriptions", tools.descriptions()},
        {"tool_names", text::join(tools.names(), ", ")},
        {"user_input", question},
        {"model_answer_prefix", opts.model_answer_prefix},
        {"agent_scratchpad", scratchpad + (retried ? kReformatNote : "") + "Thought:"},
        {"table_info", tools.schema_text(shown)},
    };
    const std::string prompt = tmpl.render(vars);
    if (opts.on_prompt) opts.on_prompt(prompt);
    const std::string reply = endpoint.complete(prompt);
    ++result.model_calls;

    const ParsedStep parsed = parse_step(reply);
    if (!parsed.well_formed()) {
      if (retried) {
        result.status = PlannerStatus::gave_up;
        finished = true;
        break;
      }
      retried = true;
      continue;
    }
    retried = false;

    ReactStep step;
    step.thought = parsed.thought;
    if (parsed.action) {
      step.action = *parsed.action;
      step.action_input = *parsed.action_input;
    } else {
      const std::string answer_text = clean_sql(*parsed.final_answer);
      if (text::lower(answer_text).find("i don't know") != std::string::npos) {
        result.status = PlannerStatus::gave_up;
        finished = true;
        break;
      }
      step.action = kQueryTool;
      step.action_input = answer_text;
    }

    if (!tools.has(step.action)) {
      step.observation = "'" + step.action + "' is not a valid tool; use one of " + bracket_list(tools.names()) + ".";
      record(std::move(step));
      continue;
    }
    auto outcome = tools.run(step.action, step.action_input);
    step.observation = outcome.observation;
    const bool answered = step.action == kQueryTool && outcome.result.has_value();
    const std::string final_sql = clean_sql(step.action_input);
    record(std::move(step));
    if (answered) {
      result.status = PlannerStatus::answered;
      result.final_sql = final_sql;
      result.result = std::move(outcome.result);
      finished = true;
    }
  }
  if (!finished) result.status = PlannerStatus::step_limit;
  result.trace = tools.trace();
  return result;
}

PlannerResult gold_replay(const std::string& question_id, const std::string& gold_sql) {
  PlannerResult r;
  r.final_sql = gold_sql;
  r.status = PlannerStatus::answered;
  r.steps.push_back({"Replaying the reference query of " + question_id + ".", kQueryTool, gold_sql, ""});
  return r;
}

PlannerResult answer(const std::string& question, const TableView& view, const ExecContext& ctx,
                     CompletionEndpoint& endpoint, const PromptTemplate& tmpl, ReactOptions opts) {
  FederationSession session(ctx);
  Toolbox tools(view, session);
  opts.tables = select_tables(question, view, endpoint, tmpl);
  return react_loop(question, tools, endpoint, tmpl, opts);
}

Predictions llm_predictions(const Corpus& corpus, const BenchmarkInstance& instance, const std::string& server_origin,
                            CompletionEndpoint& endpoint, const PromptTemplate& tmpl, const ReactOptions& opts) {
  Predictions out;
  for (const auto& db : instance.manifest.databases) {
    const TableView view = instance.view(db.db_id);
    const ExecContext ctx = instance.context(db.db_id, server_origin);
    for (const Question* q : corpus.questions_for(db.db_id)) {
      PlannerResult r = answer(q->question, view, ctx, endpoint, tmpl, opts);
      out[q->id] = r.status == PlannerStatus::answered ? r.final_sql : "";
    }
  }
  return out;
}

}  // namespace hetfed
