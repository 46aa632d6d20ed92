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
#include <string_view>
#include <vector>

namespace hetfed::text {

std::string lower(std::string_view s);
std::string upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Damerau-Levenshtein distance (adjacent transpositions allowed), case-insensitive.
std::size_t edit_distance(std::string_view a, std::string_view b);

// Lowercased word tokens of an identifier split on '_' and camel-case
// boundaries, with short connector words ("of", "the", ...) dropped and the
// result sorted.
std::vector<std::string> word_tokens(std::string_view identifier);

// Percent-encoding of everything outside RFC 3986 unreserved characters.
std::string url_encode(std::string_view s);
std::string url_decode(std::string_view s);

std::string sql_quote(std::string_view s);

}  // namespace hetfed::text
