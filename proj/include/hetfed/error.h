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

#include <stdexcept>
#include <string>

namespace hetfed {

// Base class for every domain error raised by the library. The CLI maps any
// Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class MappingError : public Error {
 public:
  using Error::Error;
};

// Syntax error in a SQL query or DDL statement. Positions are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(message + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// The input is well-formed SQL but uses a construct outside the supported
// subset.
class UnsupportedError : public ParseError {
 public:
  UnsupportedError(const std::string& construct, int line, int column)
      : ParseError("unsupported construct: " + construct, line, column),
        construct_(construct) {}

  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

// Column or table reference that cannot be resolved (unknown or ambiguous).
class ResolveError : public Error {
 public:
  using Error::Error;
};

class RewriteError : public Error {
 public:
  using Error::Error;
};

class ExecError : public Error {
 public:
  using Error::Error;
};

class PlannerError : public Error {
 public:
  using Error::Error;
};

class BenchmarkError : public Error {
 public:
  using Error::Error;
};

}  // namespace hetfed
