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

// Small string, hashing and RNG helpers shared by every module.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maskeval {

/// Half-open byte range [begin, end) into a source text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool intersects(const Span& other) const {
    return begin < other.end && other.begin < end;
  }
  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Shortest decimal string that round-trips to `v` ("0.05", "62500").
std::string format_number(double v);

/// Number of items selected at `rate` out of `n`: round(rate * n) with ties
/// going up. Rates are decimal fractions, so a 1e-9 nudge absorbs binary
/// representation error (0.15 * 10 must give 2, not 1).
std::size_t round_half_up_count(double rate, std::size_t n);

/// Stable integer key for a rate, used for grouping and map lookups.
std::int64_t rate_key(double rate);

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);
/// Maps a 64-bit hash to [0, 1).
double unit_interval(std::uint64_t h);

/// mt19937_64 with bounded draws that do not depend on the standard
/// library's distribution implementations, so seeds reproduce across
/// toolchains.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Neumaier-compensated sum; result is insensitive to summation order to
/// well below 1e-12 for the magnitudes used here.
double compensated_sum(std::span<const double> values);

}  // namespace maskeval
