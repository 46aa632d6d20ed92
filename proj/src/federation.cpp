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

#include "hetfed/federation.h"

#include <sqlite3.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>

#include "hetfed/error.h"
#include "hetfed/sql/analysis.h"
#include "hetfed/text.h"
#include "httplib.h"

namespace hetfed {

using sql::Literal;

ExecContext ExecContext::make(std::string db_path, const std::vector<ApiMapping>& mappings) {
  ExecContext ctx;
  ctx.db_path = std::move(db_path);
  for (const auto& m : mappings) ctx.registered_udfs.emplace(udf_name_for(m.entity_name), m);
  return ctx;
}

std::string ExecContext::url_for(const ApiMapping& m) const {
  auto it = base_url_overrides.find(m.entity_name);
  return it == base_url_overrides.end() ? m.url : it->second;
}

nlohmann::json StepTrace::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& s : steps) {
    nlohmann::json j;
    j["index"] = s.index;
    j["description"] = s.description;
    j["temp_table"] = s.temp_table ? nlohmann::json(*s.temp_table) : nlohmann::json(nullptr);
    j["row_count"] = s.row_count ? nlohmann::json(*s.row_count) : nlohmann::json(nullptr);
    j["status"] = s.status == StepStatus::ok ? "ok" : "error";
    steps_json.push_back(std::move(j));
  }
  return nlohmann::json{{"steps", steps_json}};
}

std::string StepTrace::serialize() const { return to_json().dump(); }

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.compare(0, scheme.size(), scheme) != 0) throw ExecError("unsupported API URL '" + url + "'");
  auto slash = url.find('/', scheme.size());
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

const ApiParam* param_of(const ApiMapping& m, const std::string& name) {
  if (const auto* p = m.find_param(name)) return p;
  for (const auto& p : m.input_params)
    if (text::iequals(p.name, name)) return &p;
  return nullptr;
}

std::string wire_text(const Literal& v, ValueType type) {
  if (type == ValueType::boolean && v.kind == Literal::Kind::integer) return v.value() == "0" ? "false" : "true";
  return v.value();
}

nlohmann::json wire_json(const Literal& v, ValueType type) {
  switch (v.kind) {
    case Literal::Kind::integer:
      if (type == ValueType::boolean) return v.value() != "0";
      return std::stoll(v.value());
    case Literal::Kind::real:
      return std::stod(v.value());
    case Literal::Kind::string:
      return v.value();
    case Literal::Kind::null:
      break;
  }
  return nullptr;
}

std::vector<Row> decode_rows(const std::string& body, const ApiMapping& m) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw ExecError("API '" + m.entity_name + "' returned a body that is not JSON");
  }
  if (!doc.is_array()) throw ExecError("API '" + m.entity_name + "' did not return a JSON array");
  std::vector<Row> rows;
  rows.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    if (!obj.is_object()) throw ExecError("row " + std::to_string(i) + " of '" + m.entity_name + "' is not an object");
    Row row;
    row.reserve(m.output_fields.size());
    for (const auto& f : m.output_fields) {
      auto it = obj.find(f.name);
      if (it == obj.end()) {
        for (auto k = obj.begin(); k != obj.end(); ++k)
          if (text::iequals(k.key(), f.name)) it = k;
      }
      if (it == obj.end()) {
        row.emplace_back();
        continue;
      }
      auto v = coerce_json(*it, f.value_type);
      if (!v)
        throw ExecError("row " + std::to_string(i) + " of '" + m.entity_name + "': field '" + f.name +
                        "' does not hold a " + std::string(to_string(f.value_type)) + " value");
      row.push_back(std::move(*v));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string request_target(const std::string& url, const ApiMapping& mapping, const std::vector<ArgBinding>& args) {
  std::string target = parse_url(url).path;
  char sep = target.find('?') == std::string::npos ? '?' : '&';
  for (const auto& a : args) {
    const ApiParam* p = param_of(mapping, a.param);
    ValueType t = p ? p->value_type : ValueType::text;
    target += sep;
    target += text::url_encode(p ? p->name : a.param);
    target += '=';
    target += text::url_encode(wire_text(a.value, t));
    sep = '&';
  }
  return target;
}

std::vector<Row> call_api(const ApiMapping& mapping, const std::vector<ArgBinding>& args, const ExecContext& ctx) {
  const std::string url = ctx.url_for(mapping);
  for (const auto& a : args)
    if (!param_of(mapping, a.param))
      throw ExecError("API '" + mapping.entity_name + "' has no parameter '" + a.param + "'");

  auto parsed = parse_url(url);
  httplib::Client client(parsed.origin);
  client.set_url_encode(false);
  client.set_keep_alive(false);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(ctx.http_timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(ctx.http_timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers{{"Accept", "application/json"}};

  httplib::Result res;
  if (mapping.method == HttpMethod::get) {
    res = client.Get(request_target(url, mapping, args), headers);
  } else {
    nlohmann::ordered_json body = nlohmann::ordered_json::object();
    for (const auto& a : args) {
      const ApiParam* p = param_of(mapping, a.param);
      body[p->name] = wire_json(a.value, p->value_type);
    }
    res = client.Post(parsed.path, headers, body.dump(), "application/json");
  }
  if (!res)
    throw ExecError("API '" + mapping.entity_name + "' is unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ExecError("API '" + mapping.entity_name + "' returned HTTP " + std::to_string(res->status));
  return decode_rows(res->body, mapping);
}

// ---------------------------------------------------------------------------
// Table-valued functions

namespace {

struct ModuleAux {
  FederationSession* session;
  std::string udf;
};

struct FnTable {
  sqlite3_vtab base;
  ModuleAux* aux;
  int ncols;
};

struct FnCursor {
  sqlite3_vtab_cursor base;
  std::shared_ptr<const std::vector<Row>> rows;
  std::size_t pos = 0;
};

std::string quote_ident(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

int fn_connect(sqlite3* db, void* p_aux, int, const char* const*, sqlite3_vtab** pp, char** err) {
  auto* aux = static_cast<ModuleAux*>(p_aux);
  try {
    const ApiMapping& m = aux->session->mapping_for(aux->udf);
    std::string ddl = "CREATE TABLE x(";
    for (const auto& f : m.output_fields) ddl += quote_ident(f.name) + " " + std::string(sql_type_name(f.value_type)) + ", ";
    ddl += "__occ HIDDEN";
    for (std::size_t i = 0; i < m.input_params.size(); ++i)
      ddl += ", __k" + std::to_string(i) + " HIDDEN, __v" + std::to_string(i) + " HIDDEN";
    ddl += ")";
    int rc = sqlite3_declare_vtab(db, ddl.c_str());
    if (rc != SQLITE_OK) return rc;
    auto* t = new FnTable{};
    t->aux = aux;
    t->ncols = static_cast<int>(m.output_fields.size());
    *pp = &t->base;
    return SQLITE_OK;
  } catch (const std::exception& e) {
    *err = sqlite3_mprintf("%s", e.what());
    return SQLITE_ERROR;
  }
}

int fn_disconnect(sqlite3_vtab* vt) {
  delete reinterpret_cast<FnTable*>(vt);
  return SQLITE_OK;
}

int fn_best_index(sqlite3_vtab* vt, sqlite3_index_info* info) {
  auto* t = reinterpret_cast<FnTable*>(vt);
  std::map<int, int> hidden;  // hidden column index -> constraint index
  for (int i = 0; i < info->nConstraint; ++i) {
    const auto& c = info->aConstraint[i];
    if (c.iColumn < t->ncols) continue;
    if (c.op != SQLITE_INDEX_CONSTRAINT_EQ) continue;
    if (!c.usable) return SQLITE_CONSTRAINT;
    hidden.emplace(c.iColumn - t->ncols, i);
  }
  std::string idx;
  int argv = 1;
  for (auto [h, ci] : hidden) {
    info->aConstraintUsage[ci].argvIndex = argv++;
    info->aConstraintUsage[ci].omit = 1;
    if (!idx.empty()) idx += ',';
    idx += std::to_string(h);
  }
  info->idxStr = sqlite3_mprintf("%s", idx.c_str());
  info->needToFreeIdxStr = 1;
  info->estimatedCost = hidden.empty() ? 1e6 : 1e3;
  info->estimatedRows = hidden.empty() ? 100000 : 100;
  return SQLITE_OK;
}

int fn_open(sqlite3_vtab*, sqlite3_vtab_cursor** pp) {
  auto* c = new FnCursor{};
  *pp = &c->base;
  return SQLITE_OK;
}

int fn_close(sqlite3_vtab_cursor* cur) {
  delete reinterpret_cast<FnCursor*>(cur);
  return SQLITE_OK;
}

Literal literal_of(sqlite3_value* v) {
  switch (sqlite3_value_type(v)) {
    case SQLITE_INTEGER:
      return Literal::integer(sqlite3_value_int64(v));
    case SQLITE_FLOAT: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", sqlite3_value_double(v));
      return Literal{Literal::Kind::real, buf};
    }
    case SQLITE_NULL:
      return Literal{};
    default: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_value_text(v));
      return Literal::string(p ? std::string(p, static_cast<std::size_t>(sqlite3_value_bytes(v))) : "");
    }
  }
}

int fn_filter(sqlite3_vtab_cursor* cur, int, const char* idx_str, int argc, sqlite3_value** argv) {
  auto* c = reinterpret_cast<FnCursor*>(cur);
  auto* t = reinterpret_cast<FnTable*>(cur->pVtab);
  try {
    int occ = -1;
    std::map<int, std::string> keys;
    std::map<int, Literal> values;
    auto parts = text::split(idx_str ? idx_str : "", ',');
    int k = 0;
    for (const auto& p : parts) {
      if (p.empty() || k >= argc) continue;
      int h = std::stoi(p);
      sqlite3_value* v = argv[k++];
      if (h == 0) {
        occ = sqlite3_value_int(v);
      } else if (h % 2 == 1) {
        const auto* s = reinterpret_cast<const char*>(sqlite3_value_text(v));
        keys[(h - 1) / 2] = s ? s : "";
      } else {
        values[(h - 2) / 2] = literal_of(v);
      }
    }
    std::vector<ArgBinding> args;
    for (const auto& [i, key] : keys) {
      auto it = values.find(i);
      if (it == values.end() || it->second.kind == Literal::Kind::null) continue;
      args.push_back({key, it->second, {}});
    }
    c->rows = t->aux->session->rows_for(t->aux->udf, occ, args);
    c->pos = 0;
    return SQLITE_OK;
  } catch (const std::exception& e) {
    sqlite3_free(t->base.zErrMsg);
    t->base.zErrMsg = sqlite3_mprintf("%s", e.what());
    return SQLITE_ERROR;
  }
}

int fn_next(sqlite3_vtab_cursor* cur) {
  ++reinterpret_cast<FnCursor*>(cur)->pos;
  return SQLITE_OK;
}

int fn_eof(sqlite3_vtab_cursor* cur) {
  auto* c = reinterpret_cast<FnCursor*>(cur);
  return !c->rows || c->pos >= c->rows->size();
}

int fn_column(sqlite3_vtab_cursor* cur, sqlite3_context* ctx, int col) {
  auto* c = reinterpret_cast<FnCursor*>(cur);
  const Row& row = (*c->rows)[c->pos];
  if (col < 0 || static_cast<std::size_t>(col) >= row.size()) {
    sqlite3_result_null(ctx);
    return SQLITE_OK;
  }
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          sqlite3_result_null(ctx);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          sqlite3_result_int64(ctx, v);
        } else if constexpr (std::is_same_v<T, double>) {
          sqlite3_result_double(ctx, v);
        } else {
          sqlite3_result_text(ctx, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
        }
      },
      row[static_cast<std::size_t>(col)]);
  return SQLITE_OK;
}

int fn_rowid(sqlite3_vtab_cursor* cur, sqlite_int64* rowid) {
  *rowid = static_cast<sqlite_int64>(reinterpret_cast<FnCursor*>(cur)->pos);
  return SQLITE_OK;
}

sqlite3_module make_module() {
  sqlite3_module m{};
  m.iVersion = 0;
  m.xCreate = nullptr;
  m.xConnect = fn_connect;
  m.xBestIndex = fn_best_index;
  m.xDisconnect = fn_disconnect;
  m.xDestroy = fn_disconnect;
  m.xOpen = fn_open;
  m.xClose = fn_close;
  m.xFilter = fn_filter;
  m.xNext = fn_next;
  m.xEof = fn_eof;
  m.xColumn = fn_column;
  m.xRowid = fn_rowid;
  return m;
}

const sqlite3_module kModule = make_module();

std::string cache_key(const std::string& udf, int occ, const std::vector<ArgBinding>& args) {
  std::string key = udf + "#" + std::to_string(occ);
  for (const auto& a : args) {
    key += "#" + text::lower(a.param) + "=" + std::to_string(static_cast<int>(a.value.kind)) + ":";
    if (a.value.kind == Literal::Kind::real) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", std::stod(a.value.value()));
      key += buf;
    } else {
      key += a.value.value();
    }
  }
  return key;
}

void collect_tables(const sql::QueryAst& ast, std::vector<std::string>& out) {
  for (const auto& r : sql::table_refs(ast)) {
    if (r.kind == sql::OccurrenceKind::derived) continue;
    if (std::find(out.begin(), out.end(), r.table_name) == out.end()) out.push_back(r.table_name);
  }
}

}  // namespace

FederationSession::FederationSession(ExecContext ctx)
    : ctx_(std::move(ctx)), db_(ctx_.db_path.empty() ? Database::in_memory() : Database::open(ctx_.db_path, true)) {
  for (const auto& [udf, mapping] : ctx_.registered_udfs) {
    auto* aux = new ModuleAux{this, udf};
    int rc = sqlite3_create_module_v2(db_.handle(), udf.c_str(), &kModule, aux,
                                      [](void* p) { delete static_cast<ModuleAux*>(p); });
    if (rc != SQLITE_OK) throw ExecError("cannot register table function '" + udf + "'");
  }
}

FederationSession::~FederationSession() = default;

const ApiMapping& FederationSession::mapping_for(const std::string& udf) const {
  auto it = ctx_.registered_udfs.find(udf);
  if (it == ctx_.registered_udfs.end()) throw ExecError("no API registered for '" + udf + "'");
  return it->second;
}

std::shared_ptr<const std::vector<Row>> FederationSession::rows_for(const std::string& udf, int occurrence,
                                                                    const std::vector<ArgBinding>& args) {
  const ApiMapping& m = mapping_for(udf);
  std::vector<ArgBinding> normalized;
  for (const auto& a : args) {
    const ApiParam* p = param_of(m, a.param);
    if (!p) throw ExecError("API '" + m.entity_name + "' has no parameter '" + a.param + "'");
    normalized.push_back({p->name, a.value, a.origin});
  }
  auto key = cache_key(udf, occurrence, normalized);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  auto rows = std::make_shared<const std::vector<Row>>(call_api(m, normalized, ctx_));
  calls_.push_back({udf, occurrence, normalized, rows->size()});
  cache_.emplace(key, rows);
  return rows;
}

void FederationSession::prefetch(const RewrittenQuery& rq) {
  for (const auto& o : rq.occurrences) rows_for(o.udf_name, o.occurrence, o.pushed);
}

ResultTable FederationSession::run(const RewrittenQuery& rq) {
  prefetch(rq);
  ResultTable out = db_.query(rq.sql(sql::Dialect::engine));
  // Unaliased expressions get a neutral name instead of their source text.
  if (const auto* s = rq.ast.root.select()) {
    bool star = false;
    for (const auto& item : s->items)
      if (item.expr.as<sql::Star>()) star = true;
    if (!star && s->items.size() == out.columns.size()) {
      for (std::size_t i = 0; i < s->items.size(); ++i) {
        const auto& item = s->items[i];
        if (!item.alias && !item.expr.as<sql::ColumnRef>()) out.columns[i] = "?column?";
      }
    }
  }
  return out;
}

std::string FederationSession::tables_of(const RewrittenQuery& rq) const {
  std::vector<std::string> names;
  collect_tables(rq.ast, names);
  return names.empty() ? "no tables" : text::join(names, ", ");
}

ResultTable FederationSession::execute(const RewrittenQuery& rq) {
  TraceStep step;
  step.index = static_cast<int>(trace_.steps.size()) + 1;
  step.description = "query over " + tables_of(rq);
  try {
    ResultTable out = run(rq);
    step.row_count = out.row_count();
    trace_.steps.push_back(step);
    return out;
  } catch (...) {
    step.status = StepStatus::error;
    trace_.steps.push_back(step);
    throw;
  }
}

ResultTable FederationSession::execute_sql(const std::string& engine_sql) { return db_.query(engine_sql); }

std::pair<std::string, std::size_t> FederationSession::materialize_temp(const RewrittenQuery& rq) {
  TraceStep step;
  step.index = static_cast<int>(trace_.steps.size()) + 1;
  step.description = "materialize query over " + tables_of(rq);
  std::string name = "tmp_step_" + std::to_string(next_temp_++);
  try {
    prefetch(rq);
    db_.exec("CREATE TEMP TABLE " + name + " AS " + rq.sql(sql::Dialect::engine));
    auto count = db_.query("SELECT count(*) FROM temp." + name);
    std::size_t n = static_cast<std::size_t>(std::get<std::int64_t>(count.rows.at(0).at(0)));
    temps_.push_back(name);
    step.temp_table = name;
    step.row_count = n;
    trace_.steps.push_back(step);
    return {name, n};
  } catch (...) {
    step.status = StepStatus::error;
    trace_.steps.push_back(step);
    throw;
  }
}

std::vector<ViewTable> FederationSession::temp_tables() {
  std::vector<ViewTable> out;
  for (const auto& name : temps_) {
    ViewTable t;
    t.name = name;
    for (const auto& r : db_.query("PRAGMA temp.table_info(" + name + ")").rows) {
      AttributeDef a;
      a.name = std::get<std::string>(r[1]);
      a.value_type = value_type_from_sql(std::get<std::string>(r[2]));
      t.columns.push_back(a);
    }
    out.push_back(std::move(t));
  }
  return out;
}

ResultTable execute(const RewrittenQuery& rq, const ExecContext& ctx) {
  FederationSession session(ctx);
  return session.execute(rq);
}

}  // namespace hetfed
