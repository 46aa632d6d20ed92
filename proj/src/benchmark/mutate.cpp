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
#include <filesystem>
#include <random>
#include <sstream>

#include "hetfed/benchmark.h"
#include "hetfed/error.h"
#include "hetfed/sqlite.h"
#include "hetfed/text.h"
#include "util.h"

namespace fs = std::filesystem;

namespace hetfed {

std::size_t ManifestDb::replaced_count() const {
  return static_cast<std::size_t>(std::count_if(tables.begin(), tables.end(), [](const auto& t) { return t.replaced; }));
}

std::vector<std::string> ManifestDb::replaced_tables() const {
  std::vector<std::string> out;
  for (const auto& t : tables)
    if (t.replaced) out.push_back(t.name);
  return out;
}

const ManifestDb* Manifest::find(const std::string& db_id) const {
  for (const auto& d : databases)
    if (d.db_id == db_id) return &d;
  return nullptr;
}

nlohmann::ordered_json Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["attr"] = attr;
  j["seed"] = seed;
  j["databases"] = nlohmann::ordered_json::array();
  for (const auto& d : databases) {
    nlohmann::ordered_json dj;
    dj["db_id"] = d.db_id;
    dj["replaced_count"] = d.replaced_count();
    dj["tables"] = nlohmann::ordered_json::array();
    for (const auto& t : d.tables) dj["tables"].push_back({{"name", t.name}, {"replaced", t.replaced}});
    j["databases"].push_back(std::move(dj));
  }
  return j;
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  Manifest m;
  try {
    m.attr = j.at("attr").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& dj : j.at("databases")) {
      ManifestDb d;
      d.db_id = dj.at("db_id").get<std::string>();
      for (const auto& tj : dj.at("tables")) d.tables.push_back({tj.at("name"), tj.at("replaced")});
      m.databases.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BenchmarkError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::size_t replaced_count(double attr, std::size_t n) {
  if (!(attr >= 0 && attr <= 100)) throw BenchmarkError("attr must be within 0..100");
  if (attr == 0 || n == 0) return 0;
  if (attr == 100) return n;
  auto k = static_cast<std::size_t>(std::floor(attr * static_cast<double>(n) / 100.0 + 0.5 + 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::vector<std::string> choose_tables(const std::string& db_id, const std::vector<std::string>& tables, double attr,
                                       std::uint64_t seed) {
  std::size_t k = replaced_count(attr, tables.size());
  std::vector<std::size_t> idx(tables.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed ^ fnv1a(db_id));
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(tables[i]);
  return out;
}

std::string BenchmarkInstance::original_db(const std::string& db_id) const {
  return (fs::path(dir) / "original" / (db_id + ".sqlite")).string();
}
std::string BenchmarkInstance::pruned_db(const std::string& db_id) const {
  return (fs::path(dir) / "pruned" / (db_id + ".sqlite")).string();
}
std::string BenchmarkInstance::schema_path(const std::string& db_id) const {
  return (fs::path(dir) / "schema" / (db_id + ".sql")).string();
}
std::string BenchmarkInstance::spec_path(const std::string& db_id, const std::string& table) const {
  return (fs::path(dir) / "specs" / (db_id + "." + table + ".json")).string();
}
std::string BenchmarkInstance::fixture_path(const std::string& db_id, const std::string& table) const {
  return (fs::path(dir) / "fixtures" / (db_id + "." + table + ".jsonl")).string();
}

AbstractSchema BenchmarkInstance::schema(const std::string& db_id) const {
  const ManifestDb* d = manifest.find(db_id);
  if (!d) throw BenchmarkError("database '" + db_id + "' is not part of the instance");
  AbstractSchema s = derive_abstract_from_db(detail::read_file(schema_path(db_id)));
  for (const auto& t : d->replaced_tables()) {
    EntityDef* e = s.find_entity(t);
    if (!e) throw BenchmarkError("manifest table '" + t + "' is missing from the schema of " + db_id);
    e->source_kind = SourceKind::api;
  }
  return s;
}

std::vector<ApiMapping> BenchmarkInstance::mappings(const std::string& db_id) const {
  const ManifestDb* d = manifest.find(db_id);
  if (!d) throw BenchmarkError("database '" + db_id + "' is not part of the instance");
  std::vector<ApiMapping> out;
  for (const auto& t : d->replaced_tables()) {
    auto ms = derive_api_mapping_from_openapi(detail::read_file(spec_path(db_id, t)));
    out.insert(out.end(), ms.begin(), ms.end());
  }
  return out;
}

TableView BenchmarkInstance::view(const std::string& db_id) const {
  return generate_table_view(schema(db_id), mappings(db_id));
}

ExecContext BenchmarkInstance::context(const std::string& db_id, const std::string& server_origin) const {
  auto ms = mappings(db_id);
  ExecContext ctx = ExecContext::make(pruned_db(db_id), ms);
  if (!server_origin.empty()) {
    for (const auto& m : ms) {
      auto scheme = m.url.find("://");
      auto slash = m.url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
      ctx.base_url_overrides[m.entity_name] = server_origin + (slash == std::string::npos ? "" : m.url.substr(slash));
    }
  }
  return ctx;
}

std::string fixture_text(const EntityDef& entity, const std::vector<Row>& rows) {
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Row& row = rows[r];
    if (row.size() != entity.attributes.size())
      throw BenchmarkError("row arity does not match table '" + entity.name + "'");
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& a = entity.attributes[i];
      const Value& v = row[i];
      auto bad = [&] {
        return BenchmarkError("row " + std::to_string(r) + " of '" + entity.name + "': column '" + a.name +
                              "' holds a value outside its declared type " + std::string(to_string(a.value_type)));
      };
      if (is_null(v)) {
        obj[a.name] = nullptr;
        continue;
      }
      switch (a.value_type) {
        case ValueType::integer:
          if (const auto* i = std::get_if<std::int64_t>(&v)) {
            obj[a.name] = *i;
          } else if (const auto* d = std::get_if<double>(&v)) {
            obj[a.name] = *d;
          } else {
            throw bad();
          }
          break;
        case ValueType::real:
          if (const auto* i = std::get_if<std::int64_t>(&v)) {
            obj[a.name] = static_cast<double>(*i);
          } else if (const auto* d = std::get_if<double>(&v)) {
            obj[a.name] = *d;
          } else {
            throw bad();
          }
          break;
        case ValueType::text:
          if (const auto* s = std::get_if<std::string>(&v)) {
            obj[a.name] = *s;
          } else {
            throw bad();
          }
          break;
        case ValueType::boolean: {
          const auto* i = std::get_if<std::int64_t>(&v);
          if (!i || (*i != 0 && *i != 1)) throw bad();
          obj[a.name] = *i == 1;
          break;
        }
      }
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

Fixture load_fixture(const std::string& path, const EntityDef& entity) {
  Fixture f;
  f.columns = entity.attributes;
  std::istringstream in(detail::read_file(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw BenchmarkError(path + ": line " + std::to_string(n + 1) + " is not JSON");
    }
    Row row;
    for (const auto& a : entity.attributes) {
      auto it = obj.find(a.name);
      if (it == obj.end()) {
        row.emplace_back();
        continue;
      }
      auto v = coerce_json(*it, a.value_type);
      if (!v) throw BenchmarkError(path + ": line " + std::to_string(n + 1) + ": bad value for " + a.name);
      row.push_back(std::move(*v));
    }
    f.rows.push_back(std::move(row));
    ++n;
  }
  return f;
}

BenchmarkInstance mutate(const Corpus& corpus, const BenchmarkConfig& cfg, const std::string& out_dir) {
  if (!(cfg.attr >= 0 && cfg.attr <= 100)) throw BenchmarkError("attr must be within 0..100");
  std::vector<std::string> dbs = cfg.databases.empty() ? corpus.db_ids : cfg.databases;
  BenchmarkInstance inst;
  inst.dir = out_dir;
  inst.manifest.attr = cfg.attr;
  inst.manifest.seed = cfg.seed;
  fs::create_directories(out_dir);
  for (const auto& sub : {"original", "pruned", "schema", "specs", "fixtures"})
    fs::create_directories(fs::path(out_dir) / sub);

  for (const auto& db_id : dbs) {
    const std::string src = corpus.db_path(db_id);
    fs::copy_file(src, inst.original_db(db_id), fs::copy_options::overwrite_existing);
    Database orig = Database::open(src, true);
    std::vector<std::string> tables = orig.table_names();
    std::string ddl = orig.schema_dump();
    detail::write_file(inst.schema_path(db_id), ddl);
    AbstractSchema schema = derive_abstract_from_db(ddl);

    auto chosen = choose_tables(db_id, tables, cfg.attr, cfg.seed);
    ManifestDb md;
    md.db_id = db_id;
    for (const auto& t : tables)
      md.tables.push_back({t, std::find(chosen.begin(), chosen.end(), t) != chosen.end()});

    for (const auto& t : chosen) {
      const EntityDef* e = schema.find_entity(t);
      if (!e) throw BenchmarkError("table '" + t + "' of " + db_id + " has no entity");
      std::string cols;
      for (const auto& a : e->attributes) cols += (cols.empty() ? "" : ", ") + detail::quote_sql_ident(a.name);
      auto rows = orig.query("SELECT " + cols + " FROM " + detail::quote_sql_ident(t) + " ORDER BY rowid").rows;
      detail::write_file(inst.fixture_path(db_id, t), fixture_text(*e, rows));
      auto spec = openapi_for_entity(*e, std::string(kDefaultServer) + "/" + db_id, db_id + "." + t);
      detail::write_file(inst.spec_path(db_id, t), spec.dump(2) + "\n");
    }

    fs::copy_file(src, inst.pruned_db(db_id), fs::copy_options::overwrite_existing);
    if (!chosen.empty()) {
      Database pruned = Database::open(inst.pruned_db(db_id), false);
      pruned.exec("PRAGMA foreign_keys = OFF");
      for (const auto& t : chosen) pruned.exec("DROP TABLE " + detail::quote_sql_ident(t));
      pruned.exec("VACUUM");
    }
    inst.manifest.databases.push_back(std::move(md));
  }
  detail::write_file((fs::path(out_dir) / "manifest.json").string(), inst.manifest.to_json().dump(2) + "\n");
  return inst;
}

BenchmarkInstance load_instance(const std::string& dir) {
  BenchmarkInstance inst;
  inst.dir = dir;
  fs::path mpath = fs::path(dir) / "manifest.json";
  if (!fs::exists(mpath)) throw BenchmarkError("no manifest.json in " + dir);
  try {
    inst.manifest = Manifest::from_json(nlohmann::json::parse(detail::read_file(mpath.string())));
  } catch (const nlohmann::json::parse_error& e) {
    throw BenchmarkError("malformed manifest: " + std::string(e.what()));
  }
  return inst;
}

}  // namespace hetfed
