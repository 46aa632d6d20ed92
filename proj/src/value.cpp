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

#include "hetfed/value.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "hetfed/text.h"

namespace hetfed {

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::integer:
      return "integer";
    case ValueType::real:
      return "real";
    case ValueType::text:
      return "text";
    case ValueType::boolean:
      return "boolean";
  }
  return "text";
}

std::optional<ValueType> value_type_from_string(std::string_view s) {
  if (s == "integer") return ValueType::integer;
  if (s == "real") return ValueType::real;
  if (s == "text") return ValueType::text;
  if (s == "boolean") return ValueType::boolean;
  return std::nullopt;
}

ValueType value_type_from_sql(std::string_view declared) {
  const std::string t = text::upper(declared);
  if (t == "BOOL" || t == "BOOLEAN") return ValueType::boolean;
  if (t.find("INT") != std::string::npos) return ValueType::integer;
  if (t.find("CHAR") != std::string::npos || t.find("CLOB") != std::string::npos ||
      t.find("TEXT") != std::string::npos || t.empty())
    return ValueType::text;
  return ValueType::real;
}

std::string_view sql_type_name(ValueType t) {
  switch (t) {
    case ValueType::integer:
      return "INTEGER";
    case ValueType::real:
      return "REAL";
    case ValueType::text:
      return "TEXT";
    case ValueType::boolean:
      return "BOOLEAN";
  }
  return "TEXT";
}

nlohmann::json value_to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return x;
        }
      },
      v);
}

nlohmann::json result_to_json(const ResultTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& v : r) row.push_back(value_to_json(v));
    rows.push_back(std::move(row));
  }
  return {{"columns", t.columns}, {"row_count", t.row_count()}, {"rows", rows}};
}

namespace {

std::optional<std::int64_t> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  try {
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  try {
    double v = std::stod(s, &pos);
    if (pos != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace

std::optional<Value> coerce_json(const nlohmann::json& j, ValueType declared) {
  if (j.is_null()) return Value{};
  switch (declared) {
    case ValueType::integer:
      if (j.is_number_integer()) return Value{j.get<std::int64_t>()};
      if (j.is_number_float()) {
        double d = j.get<double>();
        if (std::isfinite(d) && std::trunc(d) == d &&
            std::abs(d) < 9.2e18)
          return Value{static_cast<std::int64_t>(d)};
        return Value{d};
      }
      if (j.is_boolean()) return Value{std::int64_t{j.get<bool>() ? 1 : 0}};
      if (j.is_string()) {
        if (auto i = parse_int(j.get<std::string>())) return Value{*i};
      }
      return std::nullopt;
    case ValueType::real:
      if (j.is_number()) return Value{j.get<double>()};
      if (j.is_string()) {
        if (auto d = parse_real(j.get<std::string>())) return Value{*d};
      }
      return std::nullopt;
    case ValueType::text:
      if (j.is_string()) return Value{j.get<std::string>()};
      return std::nullopt;
    case ValueType::boolean:
      if (j.is_boolean()) return Value{std::int64_t{j.get<bool>() ? 1 : 0}};
      if (j.is_number_integer()) {
        auto i = j.get<std::int64_t>();
        if (i == 0 || i == 1) return Value{i};
      }
      return std::nullopt;
  }
  return std::nullopt;
}

std::string value_to_display(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "NULL";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else if constexpr (std::is_same_v<T, double>) {
          std::ostringstream os;
          os.precision(std::numeric_limits<double>::max_digits10);
          os << x;
          return os.str();
        } else {
          return std::to_string(x);
        }
      },
      v);
}

}  // namespace hetfed
