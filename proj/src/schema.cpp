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

#include "hetfed/schema.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "hetfed/error.h"
#include "hetfed/text.h"

namespace hetfed {

using nlohmann::json;
using nlohmann::ordered_json;

const AttributeDef* EntityDef::find_attribute(std::string_view attr) const {
  for (const auto& a : attributes)
    if (text::iequals(a.name, attr)) return &a;
  return nullptr;
}

const EntityDef* AbstractSchema::find_entity(std::string_view name) const {
  for (const auto& e : entities)
    if (text::iequals(e.name, name)) return &e;
  return nullptr;
}

EntityDef* AbstractSchema::find_entity(std::string_view name) {
  for (auto& e : entities)
    if (text::iequals(e.name, name)) return &e;
  return nullptr;
}

void AbstractSchema::validate() const {
  std::set<std::string> names;
  for (const auto& e : entities) {
    if (!names.insert(text::lower(e.name)).second)
      throw SchemaError("duplicate entity '" + e.name + "'");
    if (e.attributes.empty()) throw SchemaError("entity '" + e.name + "' has no attributes");
    std::set<std::string> attrs;
    for (const auto& a : e.attributes)
      if (!attrs.insert(text::lower(a.name)).second)
        throw SchemaError("duplicate attribute '" + a.name + "' in entity '" + e.name + "'");
  }
  for (const auto& r : relationships) {
    const auto* from = find_entity(r.from_entity);
    const auto* to = find_entity(r.to_entity);
    const std::string edge = r.from_entity + "." + r.from_attr + " -> " + r.to_entity + "." + r.to_attr;
    if (!from || !to) throw SchemaError("relationship " + edge + " references an unknown entity");
    const auto* fa = from->find_attribute(r.from_attr);
    const auto* ta = to->find_attribute(r.to_attr);
    if (!fa || !ta) throw SchemaError("relationship " + edge + " references an unknown attribute");
    if (fa->value_type != ta->value_type)
      throw SchemaError("relationship " + edge + " joins " + std::string(to_string(fa->value_type)) +
                        " with " + std::string(to_string(ta->value_type)));
  }
}

const ApiParam* ApiMapping::find_param(std::string_view name) const {
  for (const auto& p : input_params)
    if (text::iequals(p.name, name)) return &p;
  return nullptr;
}

const AttributeDef* ViewTable::find_column(std::string_view col) const {
  for (const auto& c : columns)
    if (text::iequals(c.name, col)) return &c;
  return nullptr;
}

const ApiParam* ViewTable::find_param(std::string_view param) const {
  for (const auto& p : params)
    if (text::iequals(p.name, param)) return &p;
  return nullptr;
}

const ViewTable* TableView::find_table(std::string_view name) const {
  for (const auto& t : tables)
    if (text::iequals(t.name, name)) return &t;
  return nullptr;
}

const ViewTable* TableView::find_udf(std::string_view udf_name) const {
  for (const auto& t : tables)
    if (t.udf_name && text::iequals(*t.udf_name, udf_name)) return &t;
  return nullptr;
}

std::vector<std::string> TableView::table_names() const {
  std::vector<std::string> out;
  for (const auto& t : tables) out.push_back(t.name);
  return out;
}

std::size_t TableView::virtual_count() const {
  return static_cast<std::size_t>(
      std::count_if(tables.begin(), tables.end(), [](const ViewTable& t) { return t.is_virtual(); }));
}

std::string udf_name_for(std::string_view entity) { return "api_" + std::string(entity); }

// ---------------------------------------------------------------------------
// OpenAPI

namespace {

ValueType openapi_type(const ordered_json& schema, const std::string& where) {
  const std::string t = schema.value("type", "");
  if (t == "integer") return ValueType::integer;
  if (t == "number") return ValueType::real;
  if (t == "string") return ValueType::text;
  if (t == "boolean") return ValueType::boolean;
  throw MappingError(where + ": unsupported schema type '" + t + "'");
}

std::string_view openapi_type_name(ValueType t) {
  switch (t) {
    case ValueType::integer:
      return "integer";
    case ValueType::real:
      return "number";
    case ValueType::text:
      return "string";
    case ValueType::boolean:
      return "boolean";
  }
  return "string";
}

ordered_json deref(const ordered_json& doc, const ordered_json& node, const std::string& where) {
  if (!node.is_object() || !node.contains("$ref")) return node;
  const std::string ref = node["$ref"].get<std::string>();
  const std::string prefix = "#/";
  if (ref.rfind(prefix, 0) != 0) throw MappingError(where + ": external $ref '" + ref + "'");
  const ordered_json* cur = &doc;
  for (const auto& part : text::split(ref.substr(2), '/')) {
    if (!cur->is_object() || !cur->contains(part)) throw MappingError(where + ": unresolved $ref '" + ref + "'");
    cur = &(*cur)[part];
  }
  return deref(doc, *cur, where);
}

}  // namespace

std::vector<ApiMapping> derive_api_mapping_from_openapi_doc(const ordered_json& spec) {
  std::vector<ApiMapping> out;
  if (!spec.is_object()) throw MappingError("OpenAPI document must be a JSON object");
  std::string server;
  if (spec.contains("servers") && spec["servers"].is_array() && !spec["servers"].empty())
    server = spec["servers"][0].value("url", "");
  while (!server.empty() && server.back() == '/') server.pop_back();
  if (!spec.contains("paths")) return out;
  for (const auto& [path, item] : spec["paths"].items()) {
    const std::string where = "path " + path;
    std::vector<std::string> methods;
    std::string op_key;
    for (const auto& [key, _] : item.items()) {
      const std::string m = text::lower(key);
      if (m == "parameters" || m == "summary" || m == "description" || m.rfind("x-", 0) == 0) continue;
      methods.push_back(m);
      op_key = key;
    }
    if (methods.size() != 1)
      throw MappingError(where + ": expected exactly one operation, found " + std::to_string(methods.size()));
    const std::string& method = methods.front();
    if (method != "get" && method != "post") throw MappingError(where + ": unsupported method '" + method + "'");
    ApiMapping m;
    m.method = method == "get" ? HttpMethod::get : HttpMethod::post;
    std::string entity = path;
    while (!entity.empty() && entity.front() == '/') entity.erase(entity.begin());
    std::replace(entity.begin(), entity.end(), '/', '_');
    const auto& op = item[op_key];
    m.entity_name = op.value("x-entity", entity);
    m.url = server + path;

    auto add_params = [&](const ordered_json& params) {
      for (const auto& raw : params) {
        const auto p = deref(spec, raw, where);
        const std::string in = p.value("in", "query");
        if (in != "query") throw MappingError(where + ": parameter location '" + in + "' not supported");
        ApiParam ap;
        ap.name = p.at("name").get<std::string>();
        ap.required = p.value("required", false);
        ap.value_type = openapi_type(deref(spec, p.value("schema", ordered_json::object()), where),
                                     where + " parameter " + ap.name);
        m.input_params.push_back(std::move(ap));
      }
    };
    if (item.contains("parameters")) add_params(item["parameters"]);
    if (op.contains("parameters")) add_params(op["parameters"]);
    if (m.method == HttpMethod::post && op.contains("requestBody")) {
      const auto body = deref(spec, op["requestBody"], where);
      const auto schema =
          deref(spec, body.value("content", ordered_json::object())
                          .value("application/json", ordered_json::object())
                          .value("schema", ordered_json::object()),
                where);
      std::set<std::string> required;
      for (const auto& r : schema.value("required", ordered_json::array())) required.insert(r.get<std::string>());
      const auto props = schema.value("properties", ordered_json::object());
      for (const auto& [name, prop] : props.items()) {
        ApiParam ap;
        ap.name = name;
        ap.required = required.count(name) > 0;
        ap.value_type = openapi_type(deref(spec, prop, where), where + " body field " + name);
        m.input_params.push_back(std::move(ap));
      }
    }

    const ordered_json* ok = nullptr;
    if (op.contains("responses")) {
      for (const char* code : {"200", "default"})
        if (op["responses"].contains(code)) {
          ok = &op["responses"][code];
          break;
        }
    }
    if (!ok) throw MappingError(where + ": no 200 response");
    const auto resp = deref(spec, *ok, where);
    const auto content = resp.value("content", ordered_json::object());
    if (!content.contains("application/json")) throw MappingError(where + ": response is not application/json");
    const auto schema = deref(spec, content["application/json"].value("schema", ordered_json::object()), where);
    if (schema.value("type", "") != "array" || !schema.contains("items"))
      throw MappingError(where + ": response is not an array of objects");
    const auto items = deref(spec, schema["items"], where);
    if (items.value("type", "object") != "object" || !items.contains("properties"))
      throw MappingError(where + ": response is not an array of objects");
    for (const auto& [name, prop] : items["properties"].items())
      m.output_fields.push_back({name, openapi_type(deref(spec, prop, where), where + " field " + name)});
    if (m.output_fields.empty()) throw MappingError(where + ": response objects have no fields");
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ApiMapping> derive_api_mapping_from_openapi(std::string_view spec) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(spec);
  } catch (const std::exception& e) {
    throw MappingError(std::string("OpenAPI document is not valid JSON: ") + e.what());
  }
  return derive_api_mapping_from_openapi_doc(doc);
}

ordered_json openapi_for_entity(const EntityDef& entity, std::string_view server_url, std::string_view title) {
  ordered_json params = ordered_json::array();
  ordered_json props = ordered_json::object();
  for (const auto& a : entity.attributes) {
    params.push_back({{"name", a.name},
                      {"in", "query"},
                      {"required", false},
                      {"description", "Equality filter on " + a.name},
                      {"schema", {{"type", openapi_type_name(a.value_type)}}}});
    props[a.name] = {{"type", openapi_type_name(a.value_type)}};
  }
  ordered_json op = {
      {"operationId", "get_" + entity.name},
      {"summary", "Rows of " + entity.name + " matching all given filters"},
      {"parameters", params},
      {"responses",
       {{"200",
         {{"description", "Matching rows"},
          {"content",
           {{"application/json",
             {{"schema", {{"type", "array"}, {"items", {{"type", "object"}, {"properties", props}}}}}}}}}}},
        {"400", {{"description", "Unknown query parameter"}}}}}};
  ordered_json doc;
  doc["openapi"] = "3.0.3";
  doc["info"] = {{"title", std::string(title)}, {"version", "1.0.0"}};
  doc["servers"] = ordered_json::array({{{"url", std::string(server_url)}}});
  doc["paths"] = ordered_json::object();
  doc["paths"]["/" + entity.name] = {{"get", op}};
  return doc;
}

// ---------------------------------------------------------------------------
// Table view

TableView generate_table_view(const AbstractSchema& schema, const std::vector<ApiMapping>& mappings) {
  std::vector<bool> used(mappings.size(), false);
  for (std::size_t i = 0; i < mappings.size(); ++i) {
    const auto* e = schema.find_entity(mappings[i].entity_name);
    if (!e || e->source_kind != SourceKind::api)
      throw MappingError("orphan mapping: no API entity named '" + mappings[i].entity_name + "'");
  }
  TableView view;
  for (const auto& e : schema.entities) {
    ViewTable t;
    t.name = e.name;
    if (e.source_kind == SourceKind::db_table) {
      t.columns = e.attributes;
      view.tables.push_back(std::move(t));
      continue;
    }
    const ApiMapping* mapping = nullptr;
    for (std::size_t i = 0; i < mappings.size(); ++i) {
      if (!text::iequals(mappings[i].entity_name, e.name)) continue;
      if (mapping) throw MappingError("entity '" + e.name + "' has more than one mapping");
      mapping = &mappings[i];
      used[i] = true;
    }
    if (!mapping) throw MappingError("missing mapping for API entity '" + e.name + "'");
    if (mapping->output_fields.size() != e.attributes.size())
      throw MappingError("mapping for '" + e.name + "' returns " + std::to_string(mapping->output_fields.size()) +
                         " fields but the entity has " + std::to_string(e.attributes.size()) + " attributes");
    for (std::size_t i = 0; i < e.attributes.size(); ++i) {
      const auto& f = mapping->output_fields[i];
      const auto& a = e.attributes[i];
      if (!text::iequals(f.name, a.name) || f.value_type != a.value_type)
        throw MappingError("mapping for '" + e.name + "' field '" + f.name + "' does not match attribute '" + a.name +
                           "'");
      AttributeDef col = a;
      col.name = f.name;
      t.columns.push_back(std::move(col));
    }
    t.kind = TableKind::virtual_table;
    t.udf_name = udf_name_for(e.name);
    t.params = mapping->input_params;
    view.tables.push_back(std::move(t));
  }
  for (const auto& t : view.tables) {
    if (!t.udf_name) continue;
    for (const auto& other : view.tables)
      if (text::iequals(other.name, *t.udf_name))
        throw SchemaError("UDF name '" + *t.udf_name + "' collides with table '" + other.name + "'");
  }
  return view;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json attr_json(const AttributeDef& a) {
  return {{"name", a.name},
          {"value_type", to_string(a.value_type)},
          {"is_primary_key", a.is_primary_key},
          {"nullable", a.nullable}};
}

ValueType type_field(const json& j, const char* key) {
  auto t = value_type_from_string(j.at(key).get<std::string>());
  if (!t) throw SchemaError("unknown value_type '" + j.at(key).get<std::string>() + "'");
  return *t;
}

AttributeDef attr_from_json(const json& j) {
  AttributeDef a;
  a.name = j.at("name").get<std::string>();
  a.value_type = type_field(j, "value_type");
  a.is_primary_key = j.value("is_primary_key", false);
  a.nullable = j.value("nullable", true);
  return a;
}

json param_json(const ApiParam& p) {
  return {{"name", p.name}, {"value_type", to_string(p.value_type)}, {"required", p.required}};
}

ApiParam param_from_json(const json& j) {
  return {j.at("name").get<std::string>(), type_field(j, "value_type"), j.value("required", false)};
}

}  // namespace

json to_json(const AbstractSchema& s) {
  json entities = json::array();
  for (const auto& e : s.entities) {
    json attrs = json::array();
    for (const auto& a : e.attributes) attrs.push_back(attr_json(a));
    entities.push_back({{"name", e.name},
                        {"attributes", attrs},
                        {"source_kind", e.source_kind == SourceKind::api ? "api" : "db_table"}});
  }
  json rels = json::array();
  for (const auto& r : s.relationships)
    rels.push_back(
        {{"from_entity", r.from_entity}, {"from_attr", r.from_attr}, {"to_entity", r.to_entity}, {"to_attr", r.to_attr}});
  return {{"entities", entities}, {"relationships", rels}};
}

json to_json(const ApiMapping& m) {
  json in = json::array();
  for (const auto& p : m.input_params) in.push_back(param_json(p));
  json out = json::array();
  for (const auto& f : m.output_fields) out.push_back({{"name", f.name}, {"value_type", to_string(f.value_type)}});
  return {{"entity_name", m.entity_name},
          {"url", m.url},
          {"method", m.method == HttpMethod::get ? "GET" : "POST"},
          {"input_params", in},
          {"output_fields", out}};
}

json to_json(const TableView& v) {
  json tables = json::array();
  for (const auto& t : v.tables) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back(attr_json(c));
    json jt = {{"name", t.name}, {"columns", cols}, {"kind", t.is_virtual() ? "virtual" : "base"}};
    if (t.udf_name) {
      jt["udf_name"] = *t.udf_name;
      json params = json::array();
      for (const auto& p : t.params) params.push_back(param_json(p));
      jt["params"] = params;
    }
    tables.push_back(std::move(jt));
  }
  return {{"tables", tables}};
}

AbstractSchema abstract_schema_from_json(const json& j) {
  AbstractSchema s;
  try {
    for (const auto& je : j.at("entities")) {
      EntityDef e;
      e.name = je.at("name").get<std::string>();
      const std::string kind = je.value("source_kind", "db_table");
      if (kind != "db_table" && kind != "api") throw SchemaError("unknown source_kind '" + kind + "'");
      e.source_kind = kind == "api" ? SourceKind::api : SourceKind::db_table;
      for (const auto& ja : je.at("attributes")) e.attributes.push_back(attr_from_json(ja));
      s.entities.push_back(std::move(e));
    }
    for (const auto& jr : j.value("relationships", json::array()))
      s.relationships.push_back({jr.at("from_entity").get<std::string>(), jr.at("from_attr").get<std::string>(),
                                 jr.at("to_entity").get<std::string>(), jr.at("to_attr").get<std::string>()});
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed abstract schema: ") + e.what());
  }
  s.validate();
  return s;
}

ApiMapping api_mapping_from_json(const json& j) {
  ApiMapping m;
  try {
    m.entity_name = j.at("entity_name").get<std::string>();
    m.url = j.at("url").get<std::string>();
    const std::string method = text::upper(j.value("method", "GET"));
    if (method != "GET" && method != "POST") throw MappingError("unsupported method '" + method + "'");
    m.method = method == "GET" ? HttpMethod::get : HttpMethod::post;
    for (const auto& p : j.value("input_params", json::array())) m.input_params.push_back(param_from_json(p));
    for (const auto& f : j.at("output_fields"))
      m.output_fields.push_back({f.at("name").get<std::string>(), type_field(f, "value_type")});
  } catch (const json::exception& e) {
    throw MappingError(std::string("malformed API mapping: ") + e.what());
  }
  return m;
}

TableView table_view_from_json(const json& j) {
  TableView v;
  try {
    for (const auto& jt : j.at("tables")) {
      ViewTable t;
      t.name = jt.at("name").get<std::string>();
      for (const auto& c : jt.at("columns")) t.columns.push_back(attr_from_json(c));
      const std::string kind = jt.value("kind", "base");
      t.kind = kind == "virtual" ? TableKind::virtual_table : TableKind::base;
      if (jt.contains("udf_name")) t.udf_name = jt["udf_name"].get<std::string>();
      for (const auto& p : jt.value("params", json::array())) t.params.push_back(param_from_json(p));
      if (t.is_virtual() != t.udf_name.has_value())
        throw SchemaError("table '" + t.name + "': virtual tables need a udf_name and base tables must not have one");
      v.tables.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed table view: ") + e.what());
  }
  return v;
}

std::vector<ApiMapping> load_api_mappings(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw MappingError(std::string("mapping document is not valid JSON: ") + e.what());
  }
  if (doc.is_object() && (doc.contains("openapi") || doc.contains("swagger") || doc.contains("paths")))
    return derive_api_mapping_from_openapi_doc(doc);
  const ordered_json list = doc.is_object() ? doc.value("mappings", ordered_json::array()) : doc;
  std::vector<ApiMapping> out;
  for (const auto& m : list) out.push_back(api_mapping_from_json(json::parse(m.dump())));
  return out;
}

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace hetfed
