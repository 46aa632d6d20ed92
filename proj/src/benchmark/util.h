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

#include <string>

namespace hetfed::detail {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
std::string padded_id(const std::string& prefix, std::size_t n);
std::string quote_sql_ident(const std::string& s);

}  // namespace hetfed::detail
