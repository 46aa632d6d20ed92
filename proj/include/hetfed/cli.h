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

#include <ostream>
#include <string>
#include <vector>

#include "hetfed/value.h"

namespace hetfed {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (program name excluded) and returns the exit code.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Plain-text rendering of a result table with aligned columns.
std::string format_result_table(const ResultTable& t);

}  // namespace hetfed
