#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file canonical.hpp
 * @brief Numeric canonicalization for answer comparison.
 *
 * Every answer comparison in the library goes through canonicalize_numeric():
 * the last numeric literal of a string is extracted and rendered as an exact
 * decimal. Two strings are "N-equal" iff both contain a literal and the
 * canonical decimals match character for character. Nothing is evaluated:
 * "3/4" canonicalizes to "4".
 */

#include <cctype>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace semdiv {

/// Exact decimal rendering of a numeric literal ("-12.5", "0", "1000").
struct CanonicalNumber {
  std::string repr;

  friend bool operator==(const CanonicalNumber&, const CanonicalNumber&) = default;
  friend auto operator<=>(const CanonicalNumber&, const CanonicalNumber&) = default;
};

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct NumericLiteral {
  bool negative = false;
  std::string int_digits;
  std::string frac_digits;
  long exponent = 0;
  std::size_t end = 0;
};

constexpr long kMaxExponent = 1000;

// Tries to read a literal starting exactly at `i`. Returns nullopt if none.
inline std::optional<NumericLiteral> read_literal(std::string_view s, std::size_t i) {
  NumericLiteral lit;
  std::size_t j = i;
  if (j < s.size() && (s[j] == '+' || s[j] == '-')) {
    // A sign only counts when it is not glued to a preceding word or number.
    if (i > 0 && (is_alnum(s[i - 1]) || s[i - 1] == '.')) return std::nullopt;
    lit.negative = s[j] == '-';
    ++j;
  }
  const std::size_t int_start = j;
  while (j < s.size() && is_digit(s[j])) ++j;
  lit.int_digits.assign(s.substr(int_start, j - int_start));

  // Thousands separators: ",ddd" groups after a leading group of 1-3 digits.
  if (!lit.int_digits.empty() && lit.int_digits.size() <= 3) {
    while (j + 3 < s.size() && s[j] == ',' && is_digit(s[j + 1]) && is_digit(s[j + 2]) &&
           is_digit(s[j + 3]) && (j + 4 >= s.size() || !is_digit(s[j + 4]))) {
      lit.int_digits.append(s.substr(j + 1, 3));
      j += 4;
    }
  }

  if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
    std::size_t k = j + 1;
    while (k < s.size() && is_digit(s[k])) ++k;
    lit.frac_digits.assign(s.substr(j + 1, k - j - 1));
    j = k;
  }
  if (lit.int_digits.empty() && lit.frac_digits.empty()) return std::nullopt;

  if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
    std::size_t k = j + 1;
    bool exp_negative = false;
    if (k < s.size() && (s[k] == '+' || s[k] == '-')) {
      exp_negative = s[k] == '-';
      ++k;
    }
    const std::size_t exp_start = k;
    long value = 0;
    bool overflow = false;
    while (k < s.size() && is_digit(s[k])) {
      value = value * 10 + (s[k] - '0');
      if (value > kMaxExponent) overflow = true;
      ++k;
    }
    if (k > exp_start && !overflow) {
      lit.exponent = exp_negative ? -value : value;
      j = k;
    }
  }
  lit.end = j;
  return lit;
}

inline CanonicalNumber render(const NumericLiteral& lit) {
  std::string mantissa = lit.int_digits + lit.frac_digits;
  long point = static_cast<long>(lit.int_digits.size()) + lit.exponent;

  std::size_t lead = 0;
  while (lead < mantissa.size() && mantissa[lead] == '0') ++lead;
  mantissa.erase(0, lead);
  point -= static_cast<long>(lead);
  while (!mantissa.empty() && mantissa.back() == '0') mantissa.pop_back();
  if (mantissa.empty()) return CanonicalNumber{"0"};

  const long len = static_cast<long>(mantissa.size());
  std::string out = lit.negative ? "-" : "";
  if (point <= 0) {
    out += "0.";
    out.append(static_cast<std::size_t>(-point), '0');
    out += mantissa;
  } else if (point >= len) {
    out += mantissa;
    out.append(static_cast<std::size_t>(point - len), '0');
  } else {
    out += mantissa.substr(0, static_cast<std::size_t>(point));
    out += '.';
    out += mantissa.substr(static_cast<std::size_t>(point));
  }
  return CanonicalNumber{std::move(out)};
}

}  // namespace detail

/// Canonical decimal of the last numeric literal in `text`, or nullopt when
/// the string holds no literal. Separators, currency symbols and trailing
/// units are ignored; scientific notation is expanded exactly.
inline std::optional<CanonicalNumber> canonicalize_numeric(std::string_view text) {
  std::optional<detail::NumericLiteral> last;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    const bool may_start = detail::is_digit(c) || c == '+' || c == '-' ||
                           (c == '.' && i + 1 < text.size() && detail::is_digit(text[i + 1]));
    if (may_start) {
      if (auto lit = detail::read_literal(text, i)) {
        i = lit->end;
        last = std::move(lit);
        continue;
      }
    }
    ++i;
  }
  if (!last) return std::nullopt;
  return detail::render(*last);
}

/// N-equality: both sides carry a literal and their canonical forms agree.
inline bool numeric_equal(std::string_view a, std::string_view b) {
  const auto ca = canonicalize_numeric(a);
  if (!ca) return false;
  const auto cb = canonicalize_numeric(b);
  return cb && *ca == *cb;
}

}  // namespace semdiv
