// Copyright 2026 The maskeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "maskeval/text_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

namespace maskeval {
namespace {

TEST(TextUtil, LowerTrimSplit) {
  EXPECT_EQ(to_lower("MiXeD 12"), "mixed 12");
  EXPECT_EQ(trim("  \tabc \n"), "abc");
  EXPECT_EQ(trim("   "), "");
  auto lines = split_lines("a\r\nb\n\nc");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[1], "b");
  EXPECT_EQ(lines[2], "");
  EXPECT_EQ(lines[3], "c");
  EXPECT_TRUE(starts_with_ci("Answer: 3", "answer"));
  EXPECT_FALSE(starts_with_ci("An", "answer"));
}

TEST(TextUtil, FormatNumberShortestRoundTrip) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(62500), "62500");
  EXPECT_EQ(format_number(0.05), "0.05");
  for (double v : {0.1, 1.0 / 3.0, 2181960000.0, 1e-7}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(TextUtil, RoundHalfUpCount) {
  EXPECT_EQ(round_half_up_count(0.5, 5), 3u);   // 2.5 -> 3
  EXPECT_EQ(round_half_up_count(0.05, 10), 1u);  // 0.5 -> 1 despite 0.05*10 < 0.5 in binary
  EXPECT_EQ(round_half_up_count(0.15, 10), 2u);
  EXPECT_EQ(round_half_up_count(0.0, 7), 0u);
  EXPECT_EQ(round_half_up_count(1.0, 7), 7u);
  EXPECT_EQ(round_half_up_count(0.3, 7), 2u);  // 2.1
  // Brute force against integer arithmetic on a twentieths grid.
  for (int k = 0; k <= 20; ++k) {
    for (std::size_t n = 0; n < 60; ++n) {
      const std::size_t expect = (static_cast<std::size_t>(k) * n * 2 + 20) / 40;
      EXPECT_EQ(round_half_up_count(k / 20.0, n), expect) << k << " " << n;
    }
  }
}

TEST(TextUtil, RateKeyIdentifiesGridPoints) {
  EXPECT_EQ(rate_key(0.05 * 3), rate_key(0.15));
  EXPECT_EQ(rate_key(1.0), 1000000);
  EXPECT_NE(rate_key(0.05), rate_key(0.1));
}

TEST(TextUtil, HashesAreStable) {
  // FNV-1a 64 reference values.
  EXPECT_EQ(fnv1a64(""), 14695981039346656037ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
  EXPECT_NE(hash_combine(1, 2), hash_combine(2, 1));
  EXPECT_EQ(hash_combine(7, 9), hash_combine(7, 9));
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = unit_interval(splitmix64(i));
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(TextUtil, SeededRngReproducible) {
  SeededRng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.below(1000);
    EXPECT_EQ(x, b.below(1000));
    EXPECT_LT(x, 1000u);
    differs |= x != c.below(1000);
  }
  EXPECT_TRUE(differs);
}

TEST(TextUtil, SeededRngMoments) {
  SeededRng rng(5);
  const int n = 200000;
  double s = 0, s2 = 0, u = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    u += rng.uniform();
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  EXPECT_NEAR(u / n, 0.5, 0.005);
}

TEST(TextUtil, PermutationIsPermutation) {
  for (std::size_t n : {0u, 1u, 2u, 17u, 100u}) {
    auto p = seeded_permutation(n, 99);
    ASSERT_EQ(p.size(), n);
    std::vector<std::size_t> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> iota(n);
    std::iota(iota.begin(), iota.end(), 0);
    EXPECT_EQ(sorted, iota);
    EXPECT_EQ(p, seeded_permutation(n, 99));
  }
  EXPECT_NE(seeded_permutation(50, 1), seeded_permutation(50, 2));
}

TEST(TextUtil, CompensatedSum) {
  std::vector<double> v(1000000, 0.1);
  v.insert(v.begin(), 1e8);
  const double got = compensated_sum(v);
  EXPECT_NEAR(got, 1e8 + 100000.0, 1e-6);
  EXPECT_EQ(compensated_sum(std::vector<double>{}), 0.0);
}

}  // namespace
}  // namespace maskeval
