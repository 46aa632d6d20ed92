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

#include "hetfed/value.h"

namespace hetfed {
namespace {

using nlohmann::json;

TEST(ValueType, SqlAffinity) {
  EXPECT_EQ(value_type_from_sql("int"), ValueType::integer);
  EXPECT_EQ(value_type_from_sql("BIGINT"), ValueType::integer);
  EXPECT_EQ(value_type_from_sql("varchar(20)"), ValueType::text);
  EXPECT_EQ(value_type_from_sql("text"), ValueType::text);
  EXPECT_EQ(value_type_from_sql("real"), ValueType::real);
  EXPECT_EQ(value_type_from_sql("NUMERIC"), ValueType::real);
  EXPECT_EQ(value_type_from_sql("bool"), ValueType::boolean);
}

TEST(ValueType, NamesRoundTrip) {
  for (auto t : {ValueType::integer, ValueType::real, ValueType::text, ValueType::boolean})
    EXPECT_EQ(value_type_from_string(to_string(t)), t);
  EXPECT_FALSE(value_type_from_string("date"));
}

TEST(CoerceJson, IntegralNumbersDecodeAsDeclared) {
  EXPECT_EQ(coerce_json(json(5), ValueType::integer), Value{std::int64_t{5}});
  EXPECT_EQ(coerce_json(json(5.0), ValueType::integer), Value{std::int64_t{5}});
  EXPECT_EQ(coerce_json(json(5.5), ValueType::integer), Value{5.5});
  EXPECT_EQ(coerce_json(json(5), ValueType::real), Value{5.0});
  EXPECT_EQ(coerce_json(json(nullptr), ValueType::text), Value{});
}

TEST(CoerceJson, BooleansAreZeroOrOne) {
  EXPECT_EQ(coerce_json(json(true), ValueType::boolean), Value{std::int64_t{1}});
  EXPECT_EQ(coerce_json(json(0), ValueType::boolean), Value{std::int64_t{0}});
  EXPECT_FALSE(coerce_json(json(2), ValueType::boolean));
  EXPECT_FALSE(coerce_json(json("yes"), ValueType::boolean));
}

TEST(CoerceJson, RejectsMismatchedShapes) {
  EXPECT_FALSE(coerce_json(json(3), ValueType::text));
  EXPECT_FALSE(coerce_json(json("abc"), ValueType::integer));
  EXPECT_FALSE(coerce_json(json::array(), ValueType::real));
}

TEST(ValueDisplay, Formats) {
  EXPECT_EQ(value_to_display(Value{}), "NULL");
  EXPECT_EQ(value_to_display(Value{std::int64_t{42}}), "42");
  EXPECT_EQ(value_to_display(Value{std::string("x")}), "x");
  EXPECT_EQ(value_to_display(Value{0.1}), "0.10000000000000001");
}

}  // namespace
}  // namespace hetfed
