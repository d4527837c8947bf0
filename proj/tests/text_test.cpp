// Copyright 2026 The esbench Authors
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

#include "esb/text.hpp"

#include <gtest/gtest.h>

namespace esb {
namespace {

TEST(NormalizeQuery, LowercasesTrimsAndCollapses) {
  EXPECT_EQ(normalize_query("  Red   SHOES\tfor\n  Kids "), "red shoes for kids");
}

TEST(NormalizeQuery, EmptyAndBlank) {
  EXPECT_EQ(normalize_query(""), "");
  EXPECT_EQ(normalize_query(" \t\n "), "");
}

TEST(NormalizeQuery, Idempotent) {
  const std::string once = normalize_query("  A  b C ");
  EXPECT_EQ(normalize_query(once), once);
}

TEST(Tokenize, SplitsOnWhitespace) {
  EXPECT_EQ(tokenize("Alpha  beta\tGamma"), (std::vector<std::string>{"alpha", "beta", "gamma"}));
  EXPECT_TRUE(tokenize("   ").empty());
}

TEST(JoinTokens, RoundTripsThroughTokenize) {
  const std::vector<std::string> tokens{"kilo", "lima", "mike"};
  EXPECT_EQ(tokenize(join_tokens(tokens)), tokens);
  EXPECT_EQ(join_tokens({}), "");
}

}  // namespace
}  // namespace esb
