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

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetfed/value.h"
#include "json.hpp"

namespace hetfed {

struct AttributeDef {
  std::string name;
  ValueType value_type = ValueType::text;
  bool is_primary_key = false;
  bool nullable = true;

  bool operator==(const AttributeDef&) const = default;
};

enum class SourceKind { db_table, api };

struct EntityDef {
  std::string name;
  std::vector<AttributeDef> attributes;
  SourceKind source_kind = SourceKind::db_table;

  const AttributeDef* find_attribute(std::string_view attr) const;
  bool operator==(const EntityDef&) const = default;
};

struct RelationshipDef {
  std::string from_entity;
  std::string from_attr;
  std::string to_entity;
  std::string to_attr;

  bool operator==(const RelationshipDef&) const = default;
};

// Source-agnostic entity/relationship description of all data sources.
struct AbstractSchema {
  std::vector<EntityDef> entities;
  std::vector<RelationshipDef> relationships;

  const EntityDef* find_entity(std::string_view name) const;
  EntityDef* find_entity(std::string_view name);

  // Throws SchemaError when entity names collide, an entity has no
  // attributes, attribute names collide, or a relationship does not resolve
  // to exactly one attribute pair of equal value type.
  void validate() const;

  bool operator==(const AbstractSchema&) const = default;
};

enum class HttpMethod { get, post };

struct ApiParam {
  std::string name;
  ValueType value_type = ValueType::text;
  bool required = false;

  bool operator==(const ApiParam&) const = default;
};

struct ApiField {
  std::string name;
  ValueType value_type = ValueType::text;

  bool operator==(const ApiField&) const = default;
};

// Everything needed to invoke one data-retrieval API.
struct ApiMapping {
  std::string entity_name;
  std::string url;  // absolute URL of the entity path
  HttpMethod method = HttpMethod::get;
  std::vector<ApiParam> input_params;
  std::vector<ApiField> output_fields;

  const ApiParam* find_param(std::string_view name) const;
  bool operator==(const ApiMapping&) const = default;
};

enum class TableKind { base, virtual_table };

struct ViewTable {
  std::string name;
  std::vector<AttributeDef> columns;
  TableKind kind = TableKind::base;
  std::optional<std::string> udf_name;
  // Arguments accepted by the UDF, in mapping order. Empty for base tables.
  std::vector<ApiParam> params;

  bool is_virtual() const { return kind == TableKind::virtual_table; }
  const AttributeDef* find_column(std::string_view col) const;
  const ApiParam* find_param(std::string_view param) const;
  bool operator==(const ViewTable&) const = default;
};

// The unified relational view: every entity appears as a table.
struct TableView {
  std::vector<ViewTable> tables;

  const ViewTable* find_table(std::string_view name) const;
  const ViewTable* find_udf(std::string_view udf_name) const;
  std::vector<std::string> table_names() const;
  std::size_t virtual_count() const;

  bool operator==(const TableView&) const = default;
};

std::string udf_name_for(std::string_view entity);

// Builds an AbstractSchema from CREATE TABLE statements. Statements other
// than CREATE TABLE are skipped. Composite foreign keys are not represented.
AbstractSchema derive_abstract_from_db(std::string_view db_schema_dump);

// One mapping per path of an OpenAPI 3.0 style document.
std::vector<ApiMapping> derive_api_mapping_from_openapi(std::string_view spec);
std::vector<ApiMapping> derive_api_mapping_from_openapi_doc(const nlohmann::ordered_json& spec);

// Emits the OpenAPI document describing a GET endpoint that serves `entity`
// with one optional equality query parameter per attribute.
nlohmann::ordered_json openapi_for_entity(const EntityDef& entity, std::string_view server_url,
                                          std::string_view title);

TableView generate_table_view(const AbstractSchema& schema, const std::vector<ApiMapping>& mappings);

// Canonical JSON forms. Keys are sorted, arrays keep declaration order.
nlohmann::json to_json(const AbstractSchema& s);
nlohmann::json to_json(const ApiMapping& m);
nlohmann::json to_json(const TableView& v);
AbstractSchema abstract_schema_from_json(const nlohmann::json& j);
ApiMapping api_mapping_from_json(const nlohmann::json& j);
TableView table_view_from_json(const nlohmann::json& j);

// Accepts either the native mapping list (a JSON array, or an object with a
// "mappings" array) or an OpenAPI document.
std::vector<ApiMapping> load_api_mappings(std::string_view text);

std::string canonical_dump(const nlohmann::json& j);

}  // namespace hetfed
