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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace hetfed {

// The closed value-type universe shared by schemas, APIs and fixtures.
enum class ValueType { integer, real, text, boolean };

std::string_view to_string(ValueType t);
std::optional<ValueType> value_type_from_string(std::string_view s);

// Maps a declared SQL column type onto the value-type universe following
// SQLite's affinity rules (INT -> integer, CHAR/CLOB/TEXT -> text, everything
// numeric -> real). BOOL/BOOLEAN maps to boolean.
ValueType value_type_from_sql(std::string_view declared);

// Declared type used when a value type is turned back into a column.
std::string_view sql_type_name(ValueType t);

// A single cell. Booleans are carried as integers 0/1, as the engine does.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

using Row = std::vector<Value>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<Row> rows;

  std::size_t row_count() const { return rows.size(); }
};

nlohmann::json value_to_json(const Value& v);
nlohmann::json result_to_json(const ResultTable& t);

// Converts a JSON scalar into a Value of the declared type. Integral numbers
// decode as integer when the declared type is integer, other numbers as real.
// Returns nullopt when the conversion would lose information.
std::optional<Value> coerce_json(const nlohmann::json& j, ValueType declared);

// Text used for display tables; not a serialization format.
std::string value_to_display(const Value& v);

}  // namespace hetfed
