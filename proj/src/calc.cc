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

#include "maskeval/calc.hpp"

#include <cctype>

#include "maskeval/error.hpp"
#include "maskeval/text_util.hpp"

namespace maskeval {

using boost::multiprecision::cpp_int;

Rational parse_decimal(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ValidationError("empty decimal literal");
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  cpp_int digits = 0;
  int scale = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits = digits * 10 + (ch - '0');
      if (seen_point) --scale;
      seen_digit = true;
    } else if (ch == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) {
    throw ValidationError("not a decimal literal: '" + std::string(text) + "'");
  }
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') {
      throw ValidationError("not a decimal literal: '" + std::string(text) +
                            "'");
    }
    ++i;
    bool exp_negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      exp_negative = text[i] == '-';
      ++i;
    }
    int exponent = 0;
    bool exp_digit = false;
    for (; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
        throw ValidationError("not a decimal literal: '" + std::string(text) +
                              "'");
      }
      exponent = exponent * 10 + (text[i] - '0');
      exp_digit = true;
    }
    if (!exp_digit) {
      throw ValidationError("not a decimal literal: '" + std::string(text) +
                            "'");
    }
    scale += exp_negative ? -exponent : exponent;
  }
  Rational value(digits);
  cpp_int power = 1;
  for (int k = 0; k < (scale < 0 ? -scale : scale); ++k) power *= 10;
  if (scale < 0) {
    value /= Rational(power);
  } else {
    value *= Rational(power);
  }
  return negative ? Rational(-value) : value;
}

Rational rational_from_double(double v) { return parse_decimal(format_number(v)); }

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::optional<Rational> CalcGround::value(std::string_view name) const {
  const std::string canonical = canonical_variable_name(name);
  if (canonical == "NR") return nr;
  if (canonical == "P") return p;
  if (canonical == "X") return x;
  if (canonical == "N") return n;
  if (canonical == "Y") return y;
  if (canonical == "L") return l;
  if (canonical == "E_prime") return e_prime;
  if (canonical == "D_prime") return d_prime;
  return std::nullopt;
}

std::string canonical_variable_name(std::string_view name) {
  const auto t = trim(name);
  // U+2032 PRIME and U+2019 RIGHT SINGLE QUOTATION MARK both show up in
  // model output for E' / D'.
  for (std::string_view base : {"E", "D"}) {
    for (std::string_view suffix :
         {"'", "\xE2\x80\xB2", "\xE2\x80\x99", "_prime", "prime"}) {
      if (t.size() == base.size() + suffix.size() && t.starts_with(base) &&
          t.ends_with(suffix)) {
        return std::string(base) + "_prime";
      }
    }
    const std::string lower = to_lower(t);
    if (lower == to_lower(base) + "_prime") return std::string(base) + "_prime";
  }
  return std::string(t);
}

CalcGivens givens_from_map(const std::map<std::string, double>& values) {
  auto get = [&](std::string_view key) {
    auto it = values.find(std::string(key));
    if (it == values.end()) {
      throw ValidationError("givens missing '" + std::string(key) + "'");
    }
    return rational_from_double(it->second);
  };
  CalcGivens g;
  g.a = get("A");
  g.b = get("B");
  g.c = get("C");
  g.d = get("D");
  g.e = get("E");
  g.unit_cost = get("unit_cost");
  g.reduction_rate = get("reduction_rate");
  return g;
}

CalcGround calc_oracle(const CalcGivens& givens) {
  const Rational planned = givens.b + givens.c;
  if (planned == 0) {
    throw ValidationError("calc_oracle: B + C must be nonzero");
  }
  CalcGround g;
  g.givens = givens;
  g.nr = givens.a - givens.c;
  g.p = givens.e / planned;
  g.x = givens.unit_cost * g.nr;
  g.n = planned * (Rational(1) - givens.reduction_rate);
  g.y = g.p * planned * givens.reduction_rate;
  g.l = g.x + g.y;
  g.e_prime = givens.e - g.l;
  g.d_prime = givens.d - g.l;
  return g;
}

}  // namespace maskeval
