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
#include "hetfed/cli.h"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "hetfed/benchmark.h"
#include "hetfed/error.h"
#include "hetfed/guardrails.h"
#include "hetfed/planner.h"
#include "hetfed/rewriter.h"
#include "hetfed/sql/parser.h"
#include "hetfed/text.h"

namespace hetfed {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

struct Settings {
  std::string corpus = std::string(HETFED_DATA_DIR) + "/corpus";
  std::string cache_dir;
  std::string server;
  std::string prompts = HETFED_PROMPT_DIR;
  EndpointConfig endpoint;
};

// Shared flags. Unset optionals fall back to the environment, then the
// config file.
struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::string> corpus;
  std::optional<std::string> cache_dir;
  std::optional<std::string> server;
  std::optional<std::string> prompts;
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  std::optional<double> timeout;
  bool as_json = false;

  Settings resolve() const {
    Settings s;
    std::optional<std::string> cfg_path = config ? config : env("HETFED_CONFIG");
    if (cfg_path) {
      json cfg = json::parse(read_file(*cfg_path), nullptr, false);
      if (cfg.is_discarded() || !cfg.is_object()) throw Error("config file " + *cfg_path + " is not a JSON object");
      if (cfg.contains("corpus")) s.corpus = cfg["corpus"].get<std::string>();
      if (cfg.contains("cache_dir")) s.cache_dir = cfg["cache_dir"].get<std::string>();
      if (cfg.contains("server")) s.server = cfg["server"].get<std::string>();
      if (cfg.contains("prompts")) s.prompts = cfg["prompts"].get<std::string>();
      if (cfg.contains("endpoint")) s.endpoint.merge_json(cfg["endpoint"]);
    }
    if (auto v = env("HETFED_CORPUS")) s.corpus = *v;
    if (auto v = env("HETFED_CACHE_DIR")) s.cache_dir = *v;
    if (auto v = env("HETFED_SERVER")) s.server = *v;
    if (auto v = env("HETFED_PROMPTS")) s.prompts = *v;
    s.endpoint.merge_env();
    if (corpus) s.corpus = *corpus;
    if (cache_dir) s.cache_dir = *cache_dir;
    if (server) s.server = *server;
    if (prompts) s.prompts = *prompts;
    if (endpoint) s.endpoint.url = *endpoint;
    if (model) s.endpoint.model = *model;
    if (timeout) s.endpoint.timeout = std::chrono::milliseconds(static_cast<long long>(*timeout * 1000));
    return s;
  }
};

void add_common(CLI::App* app, CommonFlags& f, bool corpus, bool endpoint) {
  app->add_option("--config", f.config, "JSON config file");
  app->add_flag("--json", f.as_json, "Write output as JSON");
  if (corpus) {
    app->add_option("--corpus", f.corpus, "Corpus root (database/ and questions.json)");
    app->add_option("--cache-dir", f.cache_dir, "Directory for built corpus databases");
  }
  if (endpoint) {
    app->add_option("--server", f.server, "Origin of an already running API server");
    app->add_option("--prompts", f.prompts, "Prompt template directory");
    app->add_option("--endpoint", f.endpoint, "Completion endpoint URL");
    app->add_option("--model", f.model, "Model id sent to the endpoint");
    app->add_option("--timeout", f.timeout, "Endpoint timeout in seconds");
  }
}

void emit_json(std::ostream& out, const ordered_json& j) { out << canonical_dump(json(j)); }

// View from --view, or from --instance and --db.
struct ViewSource {
  std::optional<std::string> view_file;
  std::optional<std::string> instance;
  std::optional<std::string> db;

  void add(CLI::App* app) {
    auto* v = app->add_option("--view", view_file, "TableView JSON file");
    auto* i = app->add_option("--instance", instance, "Benchmark instance directory");
    app->add_option("--db", db, "Database id within the instance");
    v->excludes(i);
  }

  TableView load() const {
    if (view_file) return table_view_from_json(json::parse(read_file(*view_file)));
    if (!instance) throw CLI::RequiredError("--view or --instance");
    BenchmarkInstance inst = load_instance(*instance);
    return inst.view(pick_db(inst));
  }

  std::string pick_db(const BenchmarkInstance& inst) const {
    if (db) {
      if (!inst.manifest.find(*db)) throw BenchmarkError("database '" + *db + "' is not part of " + inst.dir);
      return *db;
    }
    if (inst.manifest.databases.size() != 1) throw CLI::RequiredError("--db");
    return inst.manifest.databases.front().db_id;
  }
};

std::string literal_text(const sql::Literal& l) {
  return l.kind == sql::Literal::Kind::string ? text::sql_quote(l.value()) : l.raw;
}

std::string render_bindings(const RewrittenQuery& rq) {
  ResultTable t;
  t.columns = {"occurrence", "table", "function", "pushed", "residual"};
  for (const auto& o : rq.occurrences) {
    std::vector<std::string> pushed;
    for (const auto& a : o.pushed) pushed.push_back(a.param + " := " + literal_text(a.value));
    std::vector<std::string> residual;
    for (const auto& p : o.residual) residual.push_back(sql::render(p.conjunct));
    t.rows.push_back({static_cast<std::int64_t>(o.occurrence), o.table, o.udf_name,
                      pushed.empty() ? std::string("(full fetch)") : text::join(pushed, ", "),
                      residual.empty() ? std::string("-") : text::join(residual, " AND ")});
  }
  return format_result_table(t);
}

ordered_json bindings_json(const RewrittenQuery& rq) {
  ordered_json arr = ordered_json::array();
  for (const auto& o : rq.occurrences) {
    ordered_json pushed = ordered_json::array();
    for (const auto& a : o.pushed) pushed.push_back({{"param", a.param}, {"value", literal_text(a.value)}});
    ordered_json residual = ordered_json::array();
    for (const auto& p : o.residual) residual.push_back(sql::render(p.conjunct));
    arr.push_back({{"occurrence", o.occurrence},
                   {"table", o.table},
                   {"function", o.udf_name},
                   {"pushed", pushed},
                   {"residual", residual}});
  }
  return arr;
}

std::string render_trace(const StepTrace& trace) {
  ResultTable t;
  t.columns = {"step", "description", "temp_table", "rows", "status"};
  for (const auto& s : trace.steps)
    t.rows.push_back({static_cast<std::int64_t>(s.index), s.description, s.temp_table ? *s.temp_table : "-",
                      s.row_count ? Value(static_cast<std::int64_t>(*s.row_count)) : Value(std::string("-")),
                      std::string(s.status == StepStatus::ok ? "ok" : "error")});
  return format_result_table(t);
}

// Server origin for `inst`: the configured one, or a fresh in-process mock.
struct ServerLease {
  std::unique_ptr<MockServer> server;
  std::string origin;

  ServerLease(const BenchmarkInstance& inst, const std::string& configured) {
    if (!configured.empty()) {
      origin = configured;
      return;
    }
    server = std::make_unique<MockServer>(inst);
    server->start();
    origin = server->origin();
  }
};

std::unique_ptr<CompletionEndpoint> make_endpoint(const std::string& planner, const Settings& s,
                                                  const std::optional<std::string>& script) {
  if (planner == "stub") {
    if (!script) throw CLI::RequiredError("--script (required by --planner stub)");
    return std::make_unique<ScriptedEndpoint>(ScriptedEndpoint::from_text(read_file(*script)));
  }
  return std::make_unique<HttpEndpoint>(s.endpoint);
}

int run_gen_bench(const CommonFlags& f, const std::string& out_dir, double attr, std::uint64_t seed,
                  const std::vector<std::string>& dbs, std::ostream& out) {
  const Settings s = f.resolve();
  Corpus corpus = load_corpus(s.corpus, s.cache_dir);
  BenchmarkInstance inst = mutate(corpus, {attr, seed, dbs}, out_dir);
  if (f.as_json) {
    emit_json(out, {{"instance", inst.dir}, {"manifest", inst.manifest.to_json()}});
    return kExitOk;
  }
  for (const auto& db : inst.manifest.databases) {
    const auto replaced = db.replaced_tables();
    out << db.db_id << ": replaced " << replaced.size() << " of " << db.tables.size() << " tables";
    if (!replaced.empty()) out << " (" << text::join(replaced, ", ") << ")";
    out << "\n";
  }
  out << "instance written to " << inst.dir << "\n";
  return kExitOk;
}

int run_serve(const CommonFlags& f, const std::string& instance, const std::string& host, int port,
              const std::optional<std::string>& db, std::ostream& out) {
  BenchmarkInstance inst = load_instance(instance);
  if (db && !inst.manifest.find(*db)) throw BenchmarkError("database '" + *db + "' is not part of " + inst.dir);
  sigset_t set;
  sigset_t old;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, &old);
  MockServer server(inst, db.value_or(""));
  try {
    server.start(host, port);
  } catch (...) {
    pthread_sigmask(SIG_SETMASK, &old, nullptr);
    throw;
  }
  if (f.as_json)
    emit_json(out, {{"instance", inst.dir}, {"origin", server.origin()}});
  else
    out << "serving " << inst.dir << " at " << server.origin() << "\n";
  out.flush();
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  pthread_sigmask(SIG_SETMASK, &old, nullptr);
  return kExitOk;
}

int run_eval(const CommonFlags& f, const std::vector<std::string>& instances,
             const std::optional<std::string>& predictions, const std::string& planner,
             const std::optional<std::string>& script, std::ostream& out) {
  const Settings s = f.resolve();
  Corpus corpus = load_corpus(s.corpus, s.cache_dir);
  std::optional<Predictions> fixed;
  if (predictions && *predictions != "gold") {
    json j = json::parse(read_file(*predictions), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error("predictions file must map question ids to SQL");
    fixed.emplace();
    for (const auto& [id, q] : j.items()) (*fixed)[id] = q.get<std::string>();
  }
  const bool gold = (predictions && *predictions == "gold") || (!predictions && planner == "gold-replay");
  std::unique_ptr<CompletionEndpoint> endpoint;
  if (!gold && !fixed) endpoint = make_endpoint(planner, s, script);
  const PromptTemplate tmpl = PromptTemplate::load(s.prompts);

  std::vector<EvalReport> reports;
  for (const auto& dir : instances) {
    BenchmarkInstance inst = load_instance(dir);
    ServerLease lease(inst, s.server);
    Predictions preds;
    if (fixed)
      preds = *fixed;
    else if (gold)
      preds = gold_predictions(corpus, inst.manifest);
    else
      preds = llm_predictions(corpus, inst, lease.origin, *endpoint, tmpl);
    reports.push_back(evaluate(preds, corpus, inst, lease.origin));
  }
  std::sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) { return a.attr < b.attr; });

  if (f.as_json) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());
    emit_json(out, {{"reports", arr}});
    return kExitOk;
  }
  out << format_report_table(reports);
  for (const auto& r : reports) {
    const Accuracy a = r.overall();
    char buf[96];
    std::snprintf(buf, sizeof buf, "ATTR %g: accuracy %.3f (%zu/%zu)\n", r.attr, a.value(), a.correct, a.total);
    out << buf;
    for (const auto& v : r.verdicts)
      if (!v.correct) out << "  " << v.question_id << " " << v.db_id << ": " << (v.error.empty() ? "wrong result" : v.error) << "\n";
  }
  return kExitOk;
}

int run_rewrite(const CommonFlags& f, const ViewSource& vs, const std::string& sql_text, bool engine,
                std::ostream& out) {
  const TableView view = vs.load();
  const RewrittenQuery rq = rewrite(sql::parse(sql_text), view);
  if (f.as_json) {
    emit_json(out, {{"sql", rq.sql(sql::Dialect::canonical)},
                    {"engine_sql", rq.sql(sql::Dialect::engine)},
                    {"occurrences", bindings_json(rq)}});
    return kExitOk;
  }
  out << rq.sql(engine ? sql::Dialect::engine : sql::Dialect::canonical) << "\n";
  if (!rq.occurrences.empty()) out << "\n" << render_bindings(rq);
  return kExitOk;
}

int run_check(const CommonFlags& f, const ViewSource& vs, const std::string& sql_text, std::ostream& out) {
  const CheckOutcome c = check_sql(sql_text, vs.load());
  if (f.as_json)
    emit_json(out, to_json(c));
  else
    out << (c.ok() ? std::string("valid") : c.hint_text()) << "\n";
  return c.ok() ? kExitOk : kExitDomainError;
}

struct AskFlags {
  ViewSource vs;
  std::optional<std::string> question;
  std::optional<std::string> question_id;
  std::optional<std::string> gold_sql;
  std::string planner = "llm";
  std::optional<std::string> script;
  bool explain = false;
  int max_steps = 15;
};

int run_ask(const CommonFlags& f, const AskFlags& a, std::ostream& out) {
  const Settings s = f.resolve();
  if (!a.vs.instance) throw CLI::RequiredError("--instance");
  BenchmarkInstance inst = load_instance(*a.vs.instance);
  const std::string db = a.vs.pick_db(inst);
  const TableView view = inst.view(db);
  ServerLease lease(inst, s.server);
  const ExecContext ctx = inst.context(db, lease.origin);

  PlannerResult r;
  if (a.planner == "gold-replay") {
    std::string id = a.question_id.value_or("adhoc");
    std::string gold;
    if (a.gold_sql) {
      gold = *a.gold_sql;
    } else {
      if (!a.question_id) throw CLI::RequiredError("--question-id or --gold-sql (required by --planner gold-replay)");
      Corpus corpus = load_corpus(s.corpus, s.cache_dir);
      auto it = std::find_if(corpus.questions.begin(), corpus.questions.end(),
                             [&](const Question& q) { return q.id == id; });
      if (it == corpus.questions.end()) throw BenchmarkError("no question '" + id + "' in the corpus");
      gold = it->query;
    }
    r = gold_replay(id, gold);
    FederationSession session(ctx);
    Toolbox tools(view, session);
    auto outcome = tools.run(kQueryTool, r.final_sql);
    r.steps.back().observation = outcome.observation;
    r.result = std::move(outcome.result);
    if (!r.result) r.status = PlannerStatus::gave_up;
    r.trace = session.trace();
  } else {
    if (!a.question) throw CLI::RequiredError("--question");
    auto endpoint = make_endpoint(a.planner, s, a.script);
    ReactOptions opts;
    opts.max_steps = a.max_steps;
    r = answer(*a.question, view, ctx, *endpoint, PromptTemplate::load(s.prompts), opts);
  }

  if (f.as_json) {
    ordered_json j = r.to_json();
    j["result"] = r.result ? ordered_json(result_to_json(*r.result)) : ordered_json(nullptr);
    if (!a.explain) j.erase("trace");
    emit_json(out, j);
  } else {
    out << "status: " << status_name(r.status) << "\n";
    if (!r.final_sql.empty()) out << "sql: " << r.final_sql << "\n";
    if (r.result) out << "\n" << format_result_table(*r.result);
    if (r.status != PlannerStatus::answered && !r.steps.empty()) out << "last observation: " << r.steps.back().observation << "\n";
    if (a.explain) out << "\n" << render_trace(r.trace);
  }
  return r.status == PlannerStatus::answered ? kExitOk : kExitDomainError;
}

}  // namespace

std::string format_result_table(const ResultTable& t) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(t.columns);
  for (const auto& row : t.rows) {
    std::vector<std::string> line;
    for (const auto& v : row) line.push_back(value_to_display(v));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(t.columns.size(), 0);
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size() && i < width.size(); ++i) width[i] = std::max(width[i], line[i].size());
  std::string out;
  auto emit = [&](const std::vector<std::string>& line) {
    std::string l;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) l += "  ";
      l += line[i];
      if (i + 1 < line.size()) l.append(width[i] - line[i].size(), ' ');
    }
    out += l + "\n";
  };
  emit(cells.front());
  std::vector<std::string> rule;
  for (auto w : width) rule.push_back(std::string(w, '-'));
  emit(rule);
  for (std::size_t i = 1; i < cells.size(); ++i) emit(cells[i]);
  out += "(" + std::to_string(t.rows.size()) + (t.rows.size() == 1 ? " row)\n" : " rows)\n");
  return out;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated querying over databases and web APIs", "hetfed"};
  app.require_subcommand(1);

  CommonFlags gen_flags;
  std::string gen_out;
  double gen_attr = 0;
  std::uint64_t gen_seed = 0;
  std::vector<std::string> gen_dbs;
  auto* gen = app.add_subcommand("gen-bench", "Build a benchmark instance at one ATTR level");
  add_common(gen, gen_flags, true, false);
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--attr", gen_attr, "Percentage of tables replaced by APIs")->required()->check(CLI::Range(0.0, 100.0));
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--db", gen_dbs, "Database id (repeatable; default all)");

  CommonFlags serve_flags;
  std::string serve_instance;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::optional<std::string> serve_db;
  auto* serve = app.add_subcommand("serve", "Serve the instance's replaced tables as REST APIs");
  add_common(serve, serve_flags, false, false);
  serve->add_option("--instance", serve_instance, "Benchmark instance directory")->required();
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--port", serve_port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--db", serve_db, "Database answering paths without a database prefix");

  CommonFlags eval_flags;
  std::vector<std::string> eval_instances;
  std::optional<std::string> eval_predictions;
  std::string eval_planner = "gold-replay";
  std::optional<std::string> eval_script;
  auto* eval = app.add_subcommand("eval", "Score predictions by execution accuracy");
  add_common(eval, eval_flags, true, true);
  eval->add_option("--instance", eval_instances, "Benchmark instance directory (repeatable)")->required();
  auto* pred_opt = eval->add_option("--predictions", eval_predictions, "'gold' or a JSON file of id -> SQL");
  auto* planner_opt = eval->add_option("--planner", eval_planner, "Planner producing predictions")
                          ->check(CLI::IsMember({"llm", "gold-replay", "stub"}));
  pred_opt->excludes(planner_opt);
  eval->add_option("--script", eval_script, "Scripted replies for --planner stub");

  CommonFlags rewrite_flags;
  ViewSource rewrite_view;
  std::string rewrite_sql;
  bool rewrite_engine = false;
  auto* rw = app.add_subcommand("rewrite", "Show how a query is rewritten against a view");
  add_common(rw, rewrite_flags, false, false);
  rewrite_view.add(rw);
  rw->add_option("--sql", rewrite_sql, "Query text")->required();
  rw->add_flag("--engine", rewrite_engine, "Print the engine dialect");

  CommonFlags check_flags;
  ViewSource check_view;
  std::string check_sql_text;
  auto* chk = app.add_subcommand("check", "Validate a query against a view");
  add_common(chk, check_flags, false, false);
  check_view.add(chk);
  chk->add_option("--sql", check_sql_text, "Query text")->required();

  CommonFlags ask_flags;
  AskFlags ask_args;
  auto* ask = app.add_subcommand("ask", "Answer one question over an instance");
  add_common(ask, ask_flags, true, true);
  ask->add_option("--instance", ask_args.vs.instance, "Benchmark instance directory")->required();
  ask->add_option("--db", ask_args.vs.db, "Database id within the instance");
  ask->add_option("--question", ask_args.question, "Natural-language question");
  ask->add_option("--question-id", ask_args.question_id, "Corpus question id (gold-replay)");
  ask->add_option("--gold-sql", ask_args.gold_sql, "Query to replay (gold-replay)");
  ask->add_option("--planner", ask_args.planner, "Planner")->check(CLI::IsMember({"llm", "gold-replay", "stub"}));
  ask->add_option("--script", ask_args.script, "Scripted replies for --planner stub");
  ask->add_option("--max-steps", ask_args.max_steps, "Model call budget")->check(CLI::PositiveNumber);
  ask->add_flag("--explain", ask_args.explain, "Print the step trace");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    std::string sub;
    for (const auto* s : app.get_subcommands()) sub = s->get_name();
    if (!sub.empty()) err << app.get_subcommand(sub)->help();
    else err << app.help();
    return kExitUsage;
  }

  try {
    if (*gen) return run_gen_bench(gen_flags, gen_out, gen_attr, gen_seed, gen_dbs, out);
    if (*serve) return run_serve(serve_flags, serve_instance, serve_host, serve_port, serve_db, out);
    if (*eval) return run_eval(eval_flags, eval_instances, eval_predictions, eval_planner, eval_script, out);
    if (*rw) return run_rewrite(rewrite_flags, rewrite_view, rewrite_sql, rewrite_engine, out);
    if (*chk) return run_check(check_flags, check_view, check_sql_text, out);
    if (*ask) return run_ask(ask_flags, ask_args, out);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace hetfed
