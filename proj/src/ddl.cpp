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

// CREATE TABLE reader used to derive an abstract schema from a database's
// own schema dump.

#include <cctype>
#include <optional>
#include <set>

#include "hetfed/error.h"
#include "hetfed/schema.h"
#include "hetfed/text.h"

namespace hetfed {

namespace {

struct DdlToken {
  enum Kind { word, quoted, string, number, punct, end } kind = end;
  std::string text;
};

// Splits a dump into statements on top-level semicolons, ignoring those
// inside quotes and comments.
std::vector<std::string> split_statements(std::string_view dump) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t i = 0;
  auto flush = [&] {
    auto t = text::trim(cur);
    if (!t.empty()) out.push_back(std::move(t));
    cur.clear();
  };
  while (i < dump.size()) {
    char c = dump[i];
    if (c == '-' && i + 1 < dump.size() && dump[i + 1] == '-') {
      while (i < dump.size() && dump[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < dump.size() && dump[i + 1] == '*') {
      auto e = dump.find("*/", i + 2);
      i = e == std::string_view::npos ? dump.size() : e + 2;
      cur += ' ';
      continue;
    }
    if (c == '\'' || c == '"' || c == '`' || c == '[') {
      char close = c == '[' ? ']' : c;
      cur += c;
      ++i;
      while (i < dump.size()) {
        cur += dump[i];
        if (dump[i] == close) {
          if (close != ']' && i + 1 < dump.size() && dump[i + 1] == close) {
            cur += dump[++i];
            ++i;
            continue;
          }
          ++i;
          break;
        }
        ++i;
      }
      continue;
    }
    if (c == ';') {
      flush();
      ++i;
      continue;
    }
    cur += c;
    ++i;
  }
  flush();
  return out;
}

class DdlLexer {
 public:
  explicit DdlLexer(std::string_view s) : s_(s) {}

  std::vector<DdlToken> run() {
    std::vector<DdlToken> out;
    while (true) {
      skip_ws();
      if (pos_ >= s_.size()) break;
      char c = s_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t b = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        out.push_back({DdlToken::word, std::string(s_.substr(b, pos_ - b))});
      } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < s_.size())) {
        std::size_t b = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        out.push_back({DdlToken::number, std::string(s_.substr(b, pos_ - b))});
      } else if (c == '"' || c == '`' || c == '[') {
        out.push_back({DdlToken::quoted, quoted(c == '[' ? ']' : c)});
      } else if (c == '\'') {
        out.push_back({DdlToken::string, quoted('\'')});
      } else {
        out.push_back({DdlToken::punct, std::string(1, c)});
        ++pos_;
      }
    }
    out.push_back({DdlToken::end, ""});
    return out;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string quoted(char close) {
    ++pos_;
    std::string out;
    while (pos_ < s_.size()) {
      if (s_[pos_] == close) {
        if (close != ']' && pos_ + 1 < s_.size() && s_[pos_ + 1] == close) {
          out += close;
          pos_ += 2;
          continue;
        }
        ++pos_;
        return out;
      }
      out += s_[pos_++];
    }
    throw SchemaError("unterminated quoted token");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

struct PendingFk {
  std::string from_entity;
  std::string from_attr;
  std::string to_entity;
  std::optional<std::string> to_attr;
};

class CreateTableParser {
 public:
  CreateTableParser(std::vector<DdlToken> toks, std::string statement)
      : t_(std::move(toks)), stmt_(std::move(statement)) {}

  EntityDef parse(std::vector<PendingFk>& fks) {
    expect_word("CREATE");
    if (peek_word("TEMP") || peek_word("TEMPORARY")) ++i_;
    expect_word("TABLE");
    if (peek_word("IF")) {
      ++i_;
      expect_word("NOT");
      expect_word("EXISTS");
    }
    EntityDef e;
    e.name = name();
    if (peek_punct(".")) {
      ++i_;
      e.name = name();
    }
    if (peek_word("AS")) fail("CREATE TABLE ... AS SELECT is not supported");
    expect_punct("(");
    std::vector<std::string> pk_cols;
    while (true) {
      if (is_table_constraint()) {
        table_constraint(e, pk_cols, fks);
      } else {
        column_def(e, fks);
      }
      if (peek_punct(",")) {
        ++i_;
        continue;
      }
      expect_punct(")");
      break;
    }
    while (t_[i_].kind != DdlToken::end) ++i_;  // WITHOUT ROWID, STRICT
    for (const auto& c : pk_cols) {
      bool found = false;
      for (auto& a : e.attributes)
        if (text::iequals(a.name, c)) {
          a.is_primary_key = true;
          found = true;
        }
      if (!found) fail("primary key column '" + c + "' is not defined");
    }
    if (e.attributes.empty()) fail("table has no columns");
    return e;
  }

 private:
  static bool is_constraint_word(const std::string& w) {
    static const std::set<std::string> words = {"CONSTRAINT", "PRIMARY", "NOT",   "NULL",    "UNIQUE",
                                                "CHECK",      "DEFAULT", "COLLATE", "REFERENCES", "GENERATED",
                                                "AS"};
    return words.count(text::upper(w)) > 0;
  }

  bool is_table_constraint() const {
    if (t_[i_].kind != DdlToken::word) return false;
    const std::string w = text::upper(t_[i_].text);
    if (w == "CONSTRAINT" || w == "CHECK") return true;
    if ((w == "PRIMARY" || w == "FOREIGN") && i_ + 1 < t_.size() && text::iequals(t_[i_ + 1].text, "KEY")) return true;
    if (w == "UNIQUE" && i_ + 1 < t_.size() && t_[i_ + 1].text == "(") return true;
    return false;
  }

  void column_def(EntityDef& e, std::vector<PendingFk>& fks) {
    AttributeDef a;
    a.name = name();
    std::string declared;
    while (t_[i_].kind == DdlToken::word && !is_constraint_word(t_[i_].text)) {
      if (!declared.empty()) declared += ' ';
      declared += t_[i_++].text;
    }
    if (peek_punct("(")) skip_parens();
    a.value_type = value_type_from_sql(declared);
    while (!peek_punct(",") && !peek_punct(")")) {
      if (t_[i_].kind == DdlToken::end) fail("unexpected end of statement");
      const std::string w = text::upper(t_[i_].text);
      if (w == "CONSTRAINT") {
        ++i_;
        name();
      } else if (w == "PRIMARY") {
        ++i_;
        expect_word("KEY");
        a.is_primary_key = true;
        a.nullable = false;
        if (peek_word("ASC") || peek_word("DESC")) ++i_;
        if (peek_word("AUTOINCREMENT")) ++i_;
      } else if (w == "NOT") {
        ++i_;
        expect_word("NULL");
        a.nullable = false;
      } else if (w == "NULL" || w == "UNIQUE") {
        ++i_;
      } else if (w == "DEFAULT") {
        ++i_;
        if (peek_punct("(")) {
          skip_parens();
        } else {
          if (peek_punct("-") || peek_punct("+")) ++i_;
          ++i_;
        }
      } else if (w == "CHECK") {
        ++i_;
        skip_parens();
      } else if (w == "COLLATE") {
        ++i_;
        name();
      } else if (w == "REFERENCES") {
        ++i_;
        PendingFk fk{e.name, a.name, name(), std::nullopt};
        if (peek_punct("(")) {
          auto cols = name_list();
          if (cols.size() == 1) fk.to_attr = cols.front();
        }
        skip_fk_actions();
        fks.push_back(std::move(fk));
      } else if (w == "ON") {
        // ON CONFLICT clause of a column constraint.
        i_ += 3;
      } else {
        fail("unexpected token '" + t_[i_].text + "' in column definition");
      }
    }
    e.attributes.push_back(std::move(a));
  }

  void table_constraint(EntityDef& e, std::vector<std::string>& pk_cols, std::vector<PendingFk>& fks) {
    if (peek_word("CONSTRAINT")) {
      ++i_;
      name();
    }
    const std::string w = text::upper(t_[i_].text);
    if (w == "PRIMARY") {
      ++i_;
      expect_word("KEY");
      for (auto& c : name_list()) pk_cols.push_back(std::move(c));
    } else if (w == "UNIQUE") {
      ++i_;
      name_list();
    } else if (w == "CHECK") {
      ++i_;
      skip_parens();
    } else if (w == "FOREIGN") {
      ++i_;
      expect_word("KEY");
      auto from = name_list();
      expect_word("REFERENCES");
      std::string target = name();
      std::vector<std::string> to;
      if (peek_punct("(")) to = name_list();
      skip_fk_actions();
      if (from.size() == 1 && to.size() <= 1)
        fks.push_back({e.name, from.front(), target, to.empty() ? std::nullopt : std::optional(to.front())});
    } else {
      fail("unexpected table constraint '" + t_[i_].text + "'");
    }
  }

  void skip_fk_actions() {
    while (peek_word("ON") || peek_word("MATCH") || peek_word("DEFERRABLE") || peek_word("NOT")) {
      if (peek_word("NOT") && !(i_ + 1 < t_.size() && text::iequals(t_[i_ + 1].text, "DEFERRABLE"))) return;
      ++i_;
      while (t_[i_].kind == DdlToken::word && !peek_word("ON") && !peek_word("MATCH") &&
             !is_constraint_word(t_[i_].text))
        ++i_;
    }
  }

  std::vector<std::string> name_list() {
    expect_punct("(");
    std::vector<std::string> out;
    while (true) {
      out.push_back(name());
      while (peek_word("ASC") || peek_word("DESC") || peek_word("COLLATE")) {
        if (peek_word("COLLATE")) ++i_;
        ++i_;
      }
      if (peek_punct(",")) {
        ++i_;
        continue;
      }
      expect_punct(")");
      return out;
    }
  }

  void skip_parens() {
    expect_punct("(");
    int depth = 1;
    while (depth > 0) {
      if (t_[i_].kind == DdlToken::end) fail("unbalanced parentheses");
      if (peek_punct("(")) ++depth;
      if (peek_punct(")")) --depth;
      ++i_;
    }
  }

  std::string name() {
    const auto& t = t_[i_];
    if (t.kind == DdlToken::word || t.kind == DdlToken::quoted || t.kind == DdlToken::string) {
      ++i_;
      return t.text;
    }
    fail("expected a name, found '" + t.text + "'");
  }

  bool peek_word(const char* w) const { return t_[i_].kind == DdlToken::word && text::iequals(t_[i_].text, w); }
  bool peek_punct(const char* p) const { return t_[i_].kind == DdlToken::punct && t_[i_].text == p; }

  void expect_word(const char* w) {
    if (!peek_word(w)) fail(std::string("expected ") + w);
    ++i_;
  }

  void expect_punct(const char* p) {
    if (!peek_punct(p)) fail(std::string("expected '") + p + "'");
    ++i_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::string head = stmt_.substr(0, 80);
    for (auto& c : head)
      if (c == '\n') c = ' ';
    throw SchemaError("cannot parse DDL statement \"" + head + (stmt_.size() > 80 ? "..." : "") + "\": " + msg);
  }

  std::vector<DdlToken> t_;
  std::string stmt_;
  std::size_t i_ = 0;
};

bool is_create_table(const std::vector<DdlToken>& toks) {
  std::size_t i = 0;
  if (toks.size() < 3 || !text::iequals(toks[i].text, "CREATE")) return false;
  ++i;
  if (text::iequals(toks[i].text, "TEMP") || text::iequals(toks[i].text, "TEMPORARY")) ++i;
  return text::iequals(toks[i].text, "TABLE");
}

}  // namespace

AbstractSchema derive_abstract_from_db(std::string_view db_schema_dump) {
  AbstractSchema schema;
  std::vector<PendingFk> fks;
  for (const auto& stmt : split_statements(db_schema_dump)) {
    std::vector<DdlToken> toks;
    try {
      toks = DdlLexer(stmt).run();
    } catch (const SchemaError& e) {
      throw SchemaError("cannot parse DDL statement \"" + stmt.substr(0, 80) + "\": " + e.what());
    }
    if (!is_create_table(toks)) continue;
    EntityDef e = CreateTableParser(std::move(toks), stmt).parse(fks);
    if (schema.find_entity(e.name)) throw SchemaError("duplicate CREATE TABLE for '" + e.name + "'");
    schema.entities.push_back(std::move(e));
  }
  for (const auto& fk : fks) {
    const EntityDef* from = schema.find_entity(fk.from_entity);
    const EntityDef* to = schema.find_entity(fk.to_entity);
    if (!to) throw SchemaError("foreign key " + fk.from_entity + "." + fk.from_attr + " references unknown table '" +
                               fk.to_entity + "'");
    const AttributeDef* from_attr = from->find_attribute(fk.from_attr);
    if (!from_attr) throw SchemaError("foreign key column '" + fk.from_attr + "' is not defined on '" + from->name + "'");
    const AttributeDef* to_attr = nullptr;
    if (fk.to_attr) {
      to_attr = to->find_attribute(*fk.to_attr);
    } else {
      for (const auto& a : to->attributes)
        if (a.is_primary_key) {
          if (to_attr) {
            to_attr = nullptr;
            break;
          }
          to_attr = &a;
        }
    }
    if (!to_attr) throw SchemaError("foreign key " + from->name + "." + from_attr->name + " does not resolve on '" +
                                    to->name + "'");
    schema.relationships.push_back({from->name, from_attr->name, to->name, to_attr->name});
  }
  schema.validate();
  return schema;
}

}  // namespace hetfed
