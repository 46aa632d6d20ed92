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

#include <fstream>
#include <regex>
#include <sstream>

#include "hetfed/error.h"
#include "hetfed/schema.h"
#include "test_support.h"

namespace hetfed {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(DeriveAbstract, MuseumVisit) {
  const AbstractSchema s = testing::museum_schema(false);
  ASSERT_EQ(s.entities.size(), 3u);
  EXPECT_EQ(s.entities[0].name, "museum");
  EXPECT_EQ(s.entities[1].name, "visitor");
  EXPECT_EQ(s.entities[2].name, "visit");
  const auto* museum = s.find_entity("museum");
  ASSERT_EQ(museum->attributes.size(), 4u);
  EXPECT_EQ(museum->attributes[0].name, "Museum_ID");
  EXPECT_EQ(museum->attributes[0].value_type, ValueType::integer);
  EXPECT_TRUE(museum->attributes[0].is_primary_key);
  EXPECT_EQ(museum->attributes[3].value_type, ValueType::text);
  ASSERT_EQ(s.relationships.size(), 2u);
  for (const auto& r : s.relationships) EXPECT_EQ(r.from_entity, "visit");
  EXPECT_EQ(s.relationships[0].to_entity, "museum");
  EXPECT_EQ(s.relationships[1].to_entity, "visitor");
  EXPECT_EQ(s.relationships[1].to_attr, "ID");
  EXPECT_NO_THROW(s.validate());
}

TEST(DeriveAbstract, EmptyDump) { EXPECT_TRUE(derive_abstract_from_db("").entities.empty()); }

TEST(DeriveAbstract, EntityCountMatchesCreateTableScan) {
  const std::regex create(R"(CREATE\s+TABLE)", std::regex::icase);
  for (const auto& db : testing::shared_corpus().db_ids) {
    const std::string ddl = slurp(testing::corpus_root() + "/database/" + db + "/schema.sql");
    const auto n = std::distance(std::sregex_iterator(ddl.begin(), ddl.end(), create), std::sregex_iterator());
    EXPECT_EQ(derive_abstract_from_db(ddl).entities.size(), static_cast<std::size_t>(n)) << db;
  }
}

TEST(DeriveAbstract, BadStatementIsNamed) {
  try {
    derive_abstract_from_db("CREATE TABLE t (a int,, b text);");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("CREATE TABLE t"), std::string::npos) << e.what();
  }
}

TEST(Validate, RejectsDuplicatesAndTypeMismatch) {
  AbstractSchema s = testing::museum_schema(false);
  s.entities.push_back(s.entities[0]);
  EXPECT_THROW(s.validate(), SchemaError);
  s = testing::museum_schema(false);
  s.relationships.push_back({"visit", "Total_spent", "museum", "Museum_ID"});
  EXPECT_THROW(s.validate(), SchemaError);
  s = testing::museum_schema(false);
  s.relationships.push_back({"visit", "nope", "museum", "Museum_ID"});
  EXPECT_THROW(s.validate(), SchemaError);
}

const char* kMuseumSpec = R"({
  "openapi": "3.0.0",
  "servers": [{"url": "http://example.test/v1/"}],
  "paths": {
    "/museum": {
      "get": {
        "parameters": [
          {"name": "name", "in": "query", "schema": {"type": "string"}},
          {"name": "Museum_ID", "in": "query", "schema": {"type": "integer"}},
          {"name": "Num_of_Staff", "in": "query", "schema": {"type": "integer"}},
          {"name": "Open_Year", "in": "query", "schema": {"type": "string"}}
        ],
        "responses": {"200": {"content": {"application/json": {"schema": {
          "type": "array",
          "items": {"$ref": "#/components/schemas/Museum"}}}}}}
      }
    }
  },
  "components": {"schemas": {"Museum": {"type": "object", "properties": {
    "Museum_ID": {"type": "integer"}, "Name": {"type": "string"},
    "Num_of_Staff": {"type": "integer"}, "Open_Year": {"type": "string"}}}}}
})";

TEST(DeriveMapping, MuseumSpec) {
  const auto ms = derive_api_mapping_from_openapi(kMuseumSpec);
  ASSERT_EQ(ms.size(), 1u);
  const auto& m = ms[0];
  EXPECT_EQ(m.entity_name, "museum");
  EXPECT_EQ(m.method, HttpMethod::get);
  EXPECT_EQ(m.url, "http://example.test/v1/museum");
  ASSERT_EQ(m.input_params.size(), 4u);
  EXPECT_EQ(m.input_params[0].name, "name");
  EXPECT_EQ(m.input_params[0].value_type, ValueType::text);
  EXPECT_EQ(m.input_params[1].value_type, ValueType::integer);
  ASSERT_EQ(m.output_fields.size(), 4u);
  EXPECT_EQ(m.output_fields[2].name, "Num_of_Staff");
  EXPECT_EQ(m.output_fields[2].value_type, ValueType::integer);
}

TEST(DeriveMapping, NoPaths) {
  EXPECT_TRUE(derive_api_mapping_from_openapi(R"({"openapi":"3.0.0","paths":{}})").empty());
  EXPECT_TRUE(derive_api_mapping_from_openapi(R"({"openapi":"3.0.0"})").empty());
}

TEST(DeriveMapping, ErrorsNameThePath) {
  auto expect_error = [](const std::string& spec) {
    try {
      derive_api_mapping_from_openapi(spec);
      ADD_FAILURE() << "expected MappingError";
    } catch (const MappingError& e) {
      EXPECT_NE(std::string(e.what()).find("/things"), std::string::npos) << e.what();
    }
  };
  expect_error(R"({"paths":{"/things":{"put":{"responses":{"200":{}}}}}})");
  expect_error(
      R"({"paths":{"/things":{"get":{"responses":{"200":{"content":{"application/json":{"schema":{"type":"object"}}}}}}}}})");
  expect_error(R"({"paths":{"/things":{"get":{"responses":{"404":{}}}}}})");
  EXPECT_THROW(derive_api_mapping_from_openapi("not json"), MappingError);
}

TEST(DeriveMapping, PostBodyFields) {
  const auto ms = derive_api_mapping_from_openapi(R"({
    "servers": [{"url": "http://h"}],
    "paths": {"/singer": {"post": {
      "requestBody": {"content": {"application/json": {"schema": {
        "type": "object", "required": ["Age"],
        "properties": {"Age": {"type": "integer"}, "Is_male": {"type": "boolean"}}}}}},
      "responses": {"200": {"content": {"application/json": {"schema": {
        "type": "array", "items": {"type": "object", "properties": {
          "Age": {"type": "integer"}, "Is_male": {"type": "boolean"}}}}}}}}}}}
  })");
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].method, HttpMethod::post);
  ASSERT_EQ(ms[0].input_params.size(), 2u);
  EXPECT_TRUE(ms[0].input_params[0].required);
  EXPECT_EQ(ms[0].input_params[1].value_type, ValueType::boolean);
}

TEST(DeriveMapping, EmittedSpecRoundTrips) {
  const AbstractSchema s = testing::museum_schema(false);
  for (const auto& e : s.entities) {
    const auto doc = openapi_for_entity(e, "http://127.0.0.1:8080/museum_visit", e.name);
    const auto ms = derive_api_mapping_from_openapi(doc.dump());
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_EQ(ms[0].entity_name, e.name);
    EXPECT_EQ(ms[0].url, "http://127.0.0.1:8080/museum_visit/" + e.name);
    ASSERT_EQ(ms[0].output_fields.size(), e.attributes.size());
    ASSERT_EQ(ms[0].input_params.size(), e.attributes.size());
    for (std::size_t i = 0; i < e.attributes.size(); ++i) {
      EXPECT_EQ(ms[0].output_fields[i].name, e.attributes[i].name);
      EXPECT_EQ(ms[0].output_fields[i].value_type, e.attributes[i].value_type);
      EXPECT_EQ(ms[0].input_params[i].name, e.attributes[i].name);
      EXPECT_FALSE(ms[0].input_params[i].required);
    }
  }
}

TEST(TableViewGen, MuseumAsApi) {
  const TableView v = testing::museum_view(true);
  ASSERT_EQ(v.tables.size(), 3u);
  EXPECT_EQ(v.virtual_count(), 1u);
  const auto* museum = v.find_table("museum");
  ASSERT_TRUE(museum);
  EXPECT_TRUE(museum->is_virtual());
  EXPECT_EQ(museum->udf_name, "api_museum");
  EXPECT_EQ(museum->columns.size(), 4u);
  EXPECT_EQ(museum->columns[1].name, "Name");
  EXPECT_FALSE(v.find_table("visitor")->is_virtual());
  EXPECT_FALSE(v.find_table("visit")->udf_name);
  EXPECT_EQ(v.find_udf("api_museum"), museum);
  std::vector<std::string> params;
  for (const auto& p : museum->params) params.push_back(p.name);
  EXPECT_EQ(params, (std::vector<std::string>{"Museum_ID", "Name", "Num_of_Staff", "Open_Year"}));
}

TEST(TableViewGen, NoApisIsIdentity) {
  const AbstractSchema s = testing::museum_schema(false);
  const TableView v = generate_table_view(s, {});
  EXPECT_EQ(v.virtual_count(), 0u);
  ASSERT_EQ(v.tables.size(), s.entities.size());
  for (std::size_t i = 0; i < s.entities.size(); ++i) {
    EXPECT_EQ(v.tables[i].name, s.entities[i].name);
    EXPECT_EQ(v.tables[i].columns, s.entities[i].attributes);
  }
}

TEST(TableViewGen, MissingAndOrphanMappings) {
  const AbstractSchema api = testing::museum_schema(true);
  EXPECT_THROW(generate_table_view(api, {}), MappingError);
  const AbstractSchema plain = testing::museum_schema(false);
  EXPECT_THROW(generate_table_view(plain, testing::museum_mappings(api, "http://h")), MappingError);
}

TEST(TableViewGen, DeterministicSerialization) {
  EXPECT_EQ(canonical_dump(to_json(testing::museum_view(true))), canonical_dump(to_json(testing::museum_view(true))));
}

TEST(Serialization, JsonRoundTrips) {
  const AbstractSchema s = testing::museum_schema(true);
  EXPECT_EQ(abstract_schema_from_json(to_json(s)), s);
  const auto ms = testing::museum_mappings(s, "http://h/db");
  EXPECT_EQ(api_mapping_from_json(to_json(ms[0])), ms[0]);
  const TableView v = generate_table_view(s, ms);
  EXPECT_EQ(table_view_from_json(to_json(v)), v);
  EXPECT_EQ(load_api_mappings(json::array({to_json(ms[0])}).dump()), ms);
}

TEST(Serialization, RejectsInconsistentView) {
  json j = to_json(testing::museum_view(true));
  for (auto& t : j["tables"])
    if (t["name"] == "museum") t.erase("udf_name");
  EXPECT_THROW(table_view_from_json(j), SchemaError);
}

}  // namespace
}  // namespace hetfed
