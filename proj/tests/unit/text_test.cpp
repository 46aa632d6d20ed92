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

#include <deque>
#include <random>
#include <set>

#include "hetfed/text.h"

namespace hetfed {
namespace {

// Breadth-first search over single insertions, deletions, substitutions and
// adjacent swaps. Exact for the unrestricted distance on short strings.
std::size_t bfs_distance(const std::string& a, const std::string& b, const std::string& alphabet) {
  std::set<std::string> seen{a};
  std::deque<std::pair<std::string, std::size_t>> q{{a, 0}};
  while (!q.empty()) {
    auto [s, d] = q.front();
    q.pop_front();
    if (s == b) return d;
    std::vector<std::string> next;
    for (std::size_t i = 0; i <= s.size(); ++i)
      for (char c : alphabet) next.push_back(s.substr(0, i) + c + s.substr(i));
    for (std::size_t i = 0; i < s.size(); ++i) {
      next.push_back(s.substr(0, i) + s.substr(i + 1));
      for (char c : alphabet) next.push_back(s.substr(0, i) + c + s.substr(i + 1));
      if (i + 1 < s.size()) {
        std::string t = s;
        std::swap(t[i], t[i + 1]);
        next.push_back(t);
      }
    }
    for (auto& n : next)
      if (n.size() <= a.size() + b.size() && seen.insert(n).second) q.emplace_back(n, d + 1);
  }
  return SIZE_MAX;
}

TEST(EditDistance, MatchesBreadthFirstOracle) {
  std::mt19937 rng(11);
  const std::string alphabet = "abc";
  for (int iter = 0; iter < 300; ++iter) {
    auto gen = [&] {
      std::string s(rng() % 5, 'a');
      for (auto& c : s) c = alphabet[rng() % alphabet.size()];
      return s;
    };
    std::string a = gen(), b = gen();
    EXPECT_EQ(text::edit_distance(a, b), bfs_distance(a, b, alphabet)) << a << " vs " << b;
  }
}

TEST(EditDistance, UnrestrictedTransposition) {
  EXPECT_EQ(text::edit_distance("ca", "abc"), 2u);
  EXPECT_EQ(text::edit_distance("staff", "stafF"), 0u);
  EXPECT_EQ(text::edit_distance("nmae", "name"), 1u);
  EXPECT_EQ(text::edit_distance("", "abc"), 3u);
}

TEST(WordTokens, SplitsSnakeAndCamelCaseSorted) {
  EXPECT_EQ(text::word_tokens("Num_of_Staff"), (std::vector<std::string>{"num", "staff"}));
  EXPECT_EQ(text::word_tokens("staffNum"), (std::vector<std::string>{"num", "staff"}));
  EXPECT_EQ(text::word_tokens("Level-Of-Membership"), (std::vector<std::string>{"level", "membership"}));
  EXPECT_TRUE(text::word_tokens("").empty());
}

TEST(UrlEncoding, RoundTripsArbitraryBytes) {
  std::mt19937 rng(5);
  for (int iter = 0; iter < 500; ++iter) {
    std::string s(rng() % 20, '\0');
    for (auto& c : s) c = static_cast<char>(rng() % 256);
    const std::string enc = text::url_encode(s);
    for (unsigned char c : enc) EXPECT_TRUE(std::isalnum(c) || std::string("-._~%").find(c) != std::string::npos);
    EXPECT_EQ(text::url_decode(enc), s);
  }
  EXPECT_EQ(text::url_encode("Plaza Museum"), "Plaza%20Museum");
}

TEST(SqlQuote, DoublesQuotes) { EXPECT_EQ(text::sql_quote("O'Neil"), "'O''Neil'"); }

TEST(Split, KeepsEmptyFields) {
  EXPECT_EQ(text::split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(text::join({"a", "b"}, ", "), "a, b");
}

}  // namespace
}  // namespace hetfed
