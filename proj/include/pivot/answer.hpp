#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

#include "pivot/text.hpp"

namespace pivot {

enum class AnswerKind { Integer, Rational, Decimal, Text };

struct ExtractedAnswer {
  std::string raw;
  std::string canonical;
  AnswerKind kind = AnswerKind::Text;
};

// Exact fraction with positive denominator, reduced by gcd.
struct Rational {
  long long num = 0;
  long long den = 1;

  friend bool operator==(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den ==
           static_cast<__int128>(b.num) * a.den;
  }
};

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!is_ascii_digit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline std::optional<long long> parse_ll(std::string_view s) {
  if (s.size() > 18) return std::nullopt;  // stays within int64
  long long v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace detail

// Normalized answer text: trimmed, commas removed, no leading '+', and no
// trailing zeros in a fractional part ("1,000.50" -> "1000.5", "3.0" -> "3").
inline std::string canonicalize_answer(std::string_view raw) {
  std::string s = trim(raw);
  std::string t;
  t.reserve(s.size());
  for (char c : s)
    if (c != ',') t.push_back(c);
  if (!t.empty() && t.front() == '+') t.erase(t.begin());
  const size_t dot = t.find('.');
  if (dot != std::string::npos && t.find('.', dot + 1) == std::string::npos) {
    // Only tidy the fraction when the tail is purely numeric.
    std::string_view frac = std::string_view(t).substr(dot + 1);
    if (frac.empty() || detail::all_digits(frac)) {
      size_t end = t.size();
      while (end > dot + 1 && t[end - 1] == '0') --end;
      if (end == dot + 1) end = dot;  // drop a bare trailing '.'
      t.erase(end);
    }
  }
  return t;
}

inline AnswerKind classify_answer(std::string_view canonical) {
  std::string_view s = canonical;
  if (!s.empty() && s.front() == '-') s.remove_prefix(1);
  if (detail::all_digits(s)) return AnswerKind::Integer;
  const size_t slash = s.find('/');
  if (slash != std::string_view::npos && detail::all_digits(s.substr(0, slash)) &&
      detail::all_digits(s.substr(slash + 1)))
    return AnswerKind::Rational;
  const size_t dot = s.find('.');
  if (dot != std::string_view::npos) {
    std::string_view a = s.substr(0, dot), b = s.substr(dot + 1);
    const bool a_ok = a.empty() || detail::all_digits(a);
    const bool b_ok = b.empty() || detail::all_digits(b);
    if (a_ok && b_ok && !(a.empty() && b.empty())) return AnswerKind::Decimal;
  }
  return AnswerKind::Text;
}

// Parses a canonical answer as an exact rational. Integers, decimals, and a/b
// fractions are accepted; anything else (or anything wide enough to overflow
// int64) yields nullopt and falls back to string comparison.
inline std::optional<Rational> parse_rational(std::string_view canonical) {
  std::string_view s = canonical;
  bool neg = false;
  if (!s.empty() && s.front() == '-') {
    neg = true;
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;

  long long num = 0, den = 1;
  const size_t slash = s.find('/');
  const size_t dot = s.find('.');
  if (slash != std::string_view::npos) {
    if (!detail::all_digits(s.substr(0, slash)) ||
        !detail::all_digits(s.substr(slash + 1)))
      return std::nullopt;
    auto p = detail::parse_ll(s.substr(0, slash));
    auto q = detail::parse_ll(s.substr(slash + 1));
    if (!p || !q || *q == 0) return std::nullopt;
    num = *p;
    den = *q;
  } else if (dot != std::string_view::npos) {
    std::string_view a = s.substr(0, dot), b = s.substr(dot + 1);
    if (!(a.empty() || detail::all_digits(a)) || !detail::all_digits(b))
      return std::nullopt;
    std::string joined = std::string(a) + std::string(b);
    if (joined.empty()) return std::nullopt;
    auto p = detail::parse_ll(joined);
    if (!p || b.size() > 18) return std::nullopt;
    num = *p;
    den = 1;
    for (size_t i = 0; i < b.size(); ++i) {
      if (den > 922337203685477580ll / 10) return std::nullopt;
      den *= 10;
    }
  } else {
    if (!detail::all_digits(s)) return std::nullopt;
    auto p = detail::parse_ll(s);
    if (!p) return std::nullopt;
    num = *p;
  }
  if (neg) num = -num;
  const long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

// Extracts the content of the last balanced \boxed{...} group, canonicalized.
// Nested braces are tracked; unbalanced groups are skipped. Absence is a
// value, never an error.
inline std::optional<ExtractedAnswer> extract_boxed(
    std::string_view reasoning_text) {
  constexpr std::string_view kBoxed = "\\boxed{";
  std::optional<std::string> last;
  size_t pos = reasoning_text.find(kBoxed);
  while (pos != std::string_view::npos) {
    size_t i = pos + kBoxed.size();
    int depth = 1;
    const size_t content_begin = i;
    while (i < reasoning_text.size() && depth > 0) {
      if (reasoning_text[i] == '{')
        ++depth;
      else if (reasoning_text[i] == '}')
        --depth;
      ++i;
    }
    if (depth == 0) last = std::string(reasoning_text.substr(
                        content_begin, i - 1 - content_begin));
    pos = reasoning_text.find(kBoxed, pos + 1);
  }
  if (!last) return std::nullopt;
  ExtractedAnswer ans;
  ans.raw = *last;
  ans.canonical = canonicalize_answer(*last);
  ans.kind = classify_answer(ans.canonical);
  return ans;
}

// Exact equality: both sides parse as rationals and match numerically, or
// neither parses and the canonical strings match case-insensitively. Mixed
// numeric/text pairs never match. No floating-point tolerance anywhere.
inline bool answers_equal(const ExtractedAnswer& candidate,
                          std::string_view gold) {
  const std::string gold_canonical = canonicalize_answer(gold);
  const auto a = parse_rational(candidate.canonical);
  const auto b = parse_rational(gold_canonical);
  if (a && b) return *a == *b;
  if (!a && !b)
    return to_lower(candidate.canonical) == to_lower(gold_canonical);
  return false;
}

}  // namespace pivot
