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

#include <cmath>
#include <thread>

#include "hetfed/benchmark.h"
#include "hetfed/error.h"
#include "hetfed/text.h"
#include "httplib.h"

namespace hetfed {

namespace {

std::optional<double> parse_number(const std::string& s) {
  if (s.empty() || std::isspace(static_cast<unsigned char>(s.front()))) return std::nullopt;
  char* end = nullptr;
  double d = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(d)) return std::nullopt;
  return d;
}

// Target value of an equality filter; nullopt when nothing can match.
std::optional<Value> filter_value(const std::string& raw, ValueType type) {
  switch (type) {
    case ValueType::text:
      return Value{raw};
    case ValueType::integer:
    case ValueType::real:
      if (auto d = parse_number(raw)) return Value{*d};
      return std::nullopt;
    case ValueType::boolean:
      if (raw == "true" || raw == "1") return Value{std::int64_t{1}};
      if (raw == "false" || raw == "0") return Value{std::int64_t{0}};
      return std::nullopt;
  }
  return std::nullopt;
}

bool cell_matches(const Value& cell, const Value& target) {
  if (is_null(cell)) return false;
  if (const auto* s = std::get_if<std::string>(&target)) {
    const auto* c = std::get_if<std::string>(&cell);
    return c && *c == *s;
  }
  if (const auto* d = std::get_if<double>(&target)) {
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return static_cast<double>(*i) == *d;
    if (const auto* c = std::get_if<double>(&cell)) return *c == *d;
    return false;
  }
  const auto* i = std::get_if<std::int64_t>(&cell);
  return i && *i == std::get<std::int64_t>(target);
}

nlohmann::ordered_json row_json(const Fixture& f, const Row& row) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < f.columns.size(); ++i) {
    const auto& a = f.columns[i];
    const Value& v = row[i];
    if (a.value_type == ValueType::boolean && std::holds_alternative<std::int64_t>(v)) {
      obj[a.name] = std::get<std::int64_t>(v) != 0;
    } else {
      obj[a.name] = value_to_json(v);
    }
  }
  return obj;
}

std::string error_body(const std::string& msg) { return nlohmann::ordered_json{{"error", msg}}.dump(); }

}  // namespace

FixtureStore::FixtureStore(const BenchmarkInstance& instance) {
  for (const auto& d : instance.manifest.databases) {
    auto replaced = d.replaced_tables();
    if (replaced.empty()) continue;
    AbstractSchema schema = instance.schema(d.db_id);
    for (const auto& t : replaced)
      data_[d.db_id][t] = load_fixture(instance.fixture_path(d.db_id, t), *schema.find_entity(t));
  }
  if (instance.manifest.databases.size() == 1) default_db_ = instance.manifest.databases.front().db_id;
}

const Fixture* FixtureStore::fixture(const std::string& db_id, const std::string& table) const {
  auto db = data_.find(db_id);
  if (db == data_.end()) return nullptr;
  for (const auto& [name, f] : db->second)
    if (text::iequals(name, table)) return &f;
  return nullptr;
}

std::optional<std::vector<Row>> FixtureStore::filter(
    const std::string& db_id, const std::string& table,
    const std::vector<std::pair<std::string, std::string>>& params) const {
  const Fixture* f = fixture(db_id, table);
  if (!f) throw BenchmarkError("no fixture for " + db_id + "." + table);
  std::vector<std::pair<std::size_t, std::optional<Value>>> conds;
  for (const auto& [name, raw] : params) {
    std::optional<std::size_t> col;
    for (std::size_t i = 0; i < f->columns.size(); ++i)
      if (text::iequals(f->columns[i].name, name)) col = i;
    if (!col) return std::nullopt;
    conds.emplace_back(*col, filter_value(raw, f->columns[*col].value_type));
  }
  std::vector<Row> out;
  for (const auto& row : f->rows) {
    bool ok = true;
    for (const auto& [col, target] : conds) {
      if (!target || !cell_matches(row[col], *target)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(row);
  }
  return out;
}

FilterOutcome FixtureStore::handle(const std::string& path,
                                   const std::vector<std::pair<std::string, std::string>>& params) const {
  std::vector<std::string> parts;
  for (auto& p : text::split(path, '/'))
    if (!p.empty()) parts.push_back(text::url_decode(p));
  std::string db, table;
  if (parts.size() == 2) {
    db = parts[0];
    table = parts[1];
  } else if (parts.size() == 1 && !default_db_.empty()) {
    db = default_db_;
    table = parts[0];
  } else {
    return {404, error_body("not found")};
  }
  const Fixture* f = fixture(db, table);
  if (!f) return {404, error_body("not found")};
  auto rows = filter(db, table, params);
  if (!rows) {
    for (const auto& [name, raw] : params) {
      bool known = false;
      for (const auto& c : f->columns) known = known || text::iequals(c.name, name);
      if (!known) return {400, error_body("unknown parameter '" + name + "'")};
    }
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : *rows) arr.push_back(row_json(*f, r));
  return {200, arr.dump()};
}

struct MockServer::Impl {
  httplib::Server server;
  std::thread thread;
};

MockServer::MockServer(const BenchmarkInstance& instance, std::string default_db)
    : store_(instance), impl_(std::make_unique<Impl>()) {
  if (!default_db.empty()) store_.set_default_db(std::move(default_db));
  auto reply = [](httplib::Response& res, const FilterOutcome& out) {
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  impl_->server.Get(R"(/.*)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    std::vector<std::pair<std::string, std::string>> params(req.params.begin(), req.params.end());
    reply(res, store_.handle(req.path, params));
  });
  impl_->server.Post(R"(/.*)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    std::vector<std::pair<std::string, std::string>> params;
    if (!req.body.empty()) {
      auto body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) {
        reply(res, {400, error_body("request body must be a JSON object")});
        return;
      }
      for (auto it = body.begin(); it != body.end(); ++it)
        params.emplace_back(it.key(), it->is_string() ? it->get<std::string>() : it->dump());
    }
    reply(res, store_.handle(req.path, params));
  });
}

MockServer::~MockServer() { stop(); }

int MockServer::start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
    if (port_ <= 0) throw BenchmarkError("cannot bind " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) throw BenchmarkError("cannot bind " + host + ":" + std::to_string(port));
    port_ = port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void MockServer::run(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!impl_->server.listen(host, port)) throw BenchmarkError("cannot bind " + host + ":" + std::to_string(port));
}

void MockServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockServer::origin() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace hetfed
