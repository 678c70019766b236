#pragma once

// Brute-force n-gram scoring oracle. Kept deliberately naive and independent
// of the library implementation: n-grams are materialized as strings, matches
// are found by greedy one-to-one pairing against a used-flag array, and every
// order is scored with direct arithmetic. Only the shared UTF-8 decoding and
// whitespace predicates are reused.

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "pivot/text.hpp"

namespace oracle {

inline std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (current.size() > 1) {
      const char last = current.back();
      const bool punct = pivot::is_ascii_punct(static_cast<unsigned char>(last));
      if (punct) {
        out.push_back(current.substr(0, current.size() - 1));
        out.push_back(std::string(1, last));
        current.clear();
        return;
      }
    }
    out.push_back(current);
    current.clear();
  };
  for (char c : text) {
    if (pivot::is_ascii_space(static_cast<unsigned char>(c)))
      flush();
    else
      current.push_back(c);
  }
  flush();
  return out;
}

inline std::vector<std::string> char_symbols(std::string_view text) {
  std::vector<std::string> out;
  for (char32_t cp : pivot::utf8_decode(text)) {
    if (pivot::is_ascii_space(cp)) continue;
    // Stable string form of the code point.
    out.push_back("U" + std::to_string(static_cast<uint32_t>(cp)));
  }
  return out;
}

inline std::vector<std::string> grams(const std::vector<std::string>& symbols,
                                      size_t n) {
  std::vector<std::string> out;
  if (symbols.size() < n) return out;
  for (size_t i = 0; i + n <= symbols.size(); ++i) {
    std::string g;
    for (size_t k = 0; k < n; ++k) {
      g += symbols[i + k];
      g += '\x1f';
    }
    out.push_back(g);
  }
  return out;
}

// Greedy one-to-one matching; equals the clipped match count.
inline long long match_count(const std::vector<std::string>& hyp,
                             const std::vector<std::string>& ref) {
  std::vector<bool> used(ref.size(), false);
  long long matched = 0;
  for (const auto& g : hyp) {
    for (size_t j = 0; j < ref.size(); ++j) {
      if (!used[j] && ref[j] == g) {
        used[j] = true;
        ++matched;
        break;
      }
    }
  }
  return matched;
}

struct FState {
  double sum = 0.0;
  int counted = 0;

  void add(const std::vector<std::string>& hyp,
           const std::vector<std::string>& ref, double beta) {
    if (hyp.empty() && ref.empty()) return;  // order absent on both sides
    const long long m = match_count(hyp, ref);
    const double precision =
        hyp.empty() ? 0.0 : static_cast<double>(m) / hyp.size();
    const double recall =
        ref.empty() ? 0.0 : static_cast<double>(m) / ref.size();
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    sum += denom > 0 ? (1.0 + b2) * precision * recall / denom : 0.0;
    ++counted;
  }
};

inline double chrfpp(std::string_view hyp, std::string_view ref,
                     int char_order = 6, int word_order = 2,
                     double beta = 2.0) {
  const auto hyp_chars = char_symbols(hyp);
  const auto ref_chars = char_symbols(ref);
  const auto hyp_words = words(hyp);
  const auto ref_words = words(ref);
  FState state;
  for (int n = 1; n <= char_order; ++n)
    state.add(grams(hyp_chars, n), grams(ref_chars, n), beta);
  for (int n = 1; n <= word_order; ++n)
    state.add(grams(hyp_words, n), grams(ref_words, n), beta);
  return state.counted > 0 ? state.sum / state.counted : 0.0;
}

inline double bleu(std::string_view hyp, std::string_view ref) {
  const auto hyp_words = words(hyp);
  const auto ref_words = words(ref);
  if (hyp_words.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    const auto h = grams(hyp_words, n);
    const auto r = grams(ref_words, n);
    const long long m = match_count(h, r);
    if (n == 1 && m == 0) return 0.0;
    const double p = m > 0 ? static_cast<double>(m) / h.size()
                           : 1.0 / (static_cast<double>(h.size()) + 1.0);
    log_sum += std::log(p);
  }
  double brevity = 1.0;
  if (ref_words.size() > hyp_words.size())
    brevity = std::exp(1.0 - static_cast<double>(ref_words.size()) /
                                 static_cast<double>(hyp_words.size()));
  return brevity * std::exp(log_sum / 4.0);
}

}  // namespace oracle
