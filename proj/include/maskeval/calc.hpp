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

// Exact ground truth for the guided recall-cost calculation task.
//
// All arithmetic is rational so the derived values (P = 62,500 and friends)
// come out exact instead of within a float tolerance.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace maskeval {

using Rational = boost::multiprecision::cpp_rational;

/// Parses a plain decimal literal ("2772000000", "0.25", "-1.5e3") exactly.
Rational parse_decimal(std::string_view text);
/// Exact rational for the shortest decimal that round-trips to `v`.
Rational rational_from_double(double v);
double to_double(const Rational& r);

struct CalcGivens {
  Rational a;  // 2023 production volume
  Rational b;  // 2024 production plan
  Rational c;  // inventory at end of April 2024
  Rational d;  // planned revenue for the fiscal year
  Rational e;  // planned revenue of the recalled model
  Rational unit_cost;
  Rational reduction_rate;
};

struct CalcGround {
  CalcGivens givens;
  Rational nr;
  Rational p;
  Rational x;
  Rational n;
  Rational y;
  Rational l;
  Rational e_prime;
  Rational d_prime;

  /// Value by canonical variable name (see kCalcVariables); nullopt if the
  /// name is unknown.
  std::optional<Rational> value(std::string_view name) const;
};

/// Every derived variable, in derivation order.
inline constexpr std::array<std::string_view, 8> kCalcVariables = {
    "NR", "P", "X", "N", "Y", "L", "E_prime", "D_prime"};
/// The five variables that enter the success indicators.
inline constexpr std::array<std::string_view, 5> kScoredVariables = {
    "P", "N", "Y", "E_prime", "D_prime"};
/// Names accepted in the givens map.
inline constexpr std::array<std::string_view, 7> kGivenNames = {
    "A", "B", "C", "D", "E", "unit_cost", "reduction_rate"};

/// Maps spelling variants ("E'", "E′", "e_prime") to the canonical name;
/// returns the input unchanged when it is not a known variable.
std::string canonical_variable_name(std::string_view name);

/// Builds givens from a name -> number map; throws ValidationError naming
/// the first missing key.
CalcGivens givens_from_map(const std::map<std::string, double>& values);

/// NR = A - C, P = E / (B + C), X = unit_cost * NR,
/// N = (B + C)(1 - rate), Y = P (B + C) rate, L = X + Y,
/// E' = E - L, D' = D - L.
/// Throws ValidationError when B + C = 0.
CalcGround calc_oracle(const CalcGivens& givens);

}  // namespace maskeval
