#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pivot/errors.hpp"
#include "pivot/text.hpp"

namespace pivot {

enum class Scale { Unit, Percent };

struct MetricConfig {
  int char_ngram_order = 6;
  int word_ngram_order = 2;
  double beta = 2.0;
  Scale scale = Scale::Unit;

  void validate() const {
    if (char_ngram_order < 1)
      throw ConfigError("metric.char_ngram_order must be >= 1");
    if (word_ngram_order < 0)
      throw ConfigError("metric.word_ngram_order must be >= 0");
    if (!(beta > 0)) throw ConfigError("metric.beta must be > 0");
  }
};

// Translation metric M: scores a hypothesis against the source and an
// optional English reference, in [0, 1] under Scale::Unit.
struct MetricFn {
  std::string name;
  std::function<double(std::string_view hypothesis, std::string_view source,
                       const std::optional<std::string>& reference)>
      scorer;
};

// Word pre-tokenization shared by the n-gram metrics: split on whitespace,
// then peel a single trailing ASCII punctuation character off multi-char
// pieces as its own token.
inline std::vector<std::string> metric_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& piece : split_whitespace(s)) {
    if (piece.size() > 1 &&
        is_ascii_punct(static_cast<unsigned char>(piece.back()))) {
      out.emplace_back(piece.substr(0, piece.size() - 1));
      out.emplace_back(1, piece.back());
    } else {
      out.emplace_back(std::move(piece));
    }
  }
  return out;
}

namespace detail {

struct OrderStats {
  long long hyp_total = 0;
  long long ref_total = 0;
  long long matched = 0;  // clipped: sum over grams of min(hyp, ref) counts
};

// Clipped n-gram matching over an arbitrary symbol sequence. Keys are the raw
// bytes of the n-symbol window.
template <typename Sym>
OrderStats ngram_stats(const std::vector<Sym>& hyp, const std::vector<Sym>& ref,
                       size_t n) {
  OrderStats st;
  st.hyp_total = hyp.size() + 1 >= n
                     ? static_cast<long long>(hyp.size() - n + 1)
                     : 0;
  st.ref_total = ref.size() + 1 >= n
                     ? static_cast<long long>(ref.size() - n + 1)
                     : 0;
  if (st.hyp_total <= 0 || st.ref_total <= 0) {
    st.hyp_total = std::max(st.hyp_total, 0ll);
    st.ref_total = std::max(st.ref_total, 0ll);
    return st;
  }
  auto key_at = [n](const std::vector<Sym>& seq, size_t i) {
    std::string key;
    key.resize(n * sizeof(Sym));
    std::memcpy(key.data(), seq.data() + i, n * sizeof(Sym));
    return key;
  };
  std::unordered_map<std::string, long long> ref_counts;
  for (long long i = 0; i < st.ref_total; ++i) ++ref_counts[key_at(ref, i)];
  std::unordered_map<std::string, long long> hyp_counts;
  for (long long i = 0; i < st.hyp_total; ++i) ++hyp_counts[key_at(hyp, i)];
  for (const auto& [key, count] : hyp_counts) {
    auto it = ref_counts.find(key);
    if (it != ref_counts.end()) st.matched += std::min(count, it->second);
  }
  return st;
}

inline double f_beta(const OrderStats& st, double beta) {
  const double precision =
      st.hyp_total > 0 ? static_cast<double>(st.matched) / st.hyp_total : 0.0;
  const double recall =
      st.ref_total > 0 ? static_cast<double>(st.matched) / st.ref_total : 0.0;
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom <= 0) return 0.0;
  return (1.0 + b2) * precision * recall / denom;
}

// Symbol ids for word sequences so word and char n-grams share one counter.
inline std::vector<uint32_t> word_ids(const std::vector<std::string>& words) {
  std::unordered_map<std::string, uint32_t> table;
  std::vector<uint32_t> ids;
  ids.reserve(words.size());
  for (const auto& w : words) {
    auto [it, _] = table.emplace(w, static_cast<uint32_t>(table.size()));
    ids.push_back(it->second);
  }
  return ids;
}

inline std::vector<uint32_t> word_ids_joint(
    const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
    std::vector<uint32_t>& ref_ids) {
  std::unordered_map<std::string, uint32_t> table;
  auto intern = [&](const std::string& w) {
    auto [it, _] = table.emplace(w, static_cast<uint32_t>(table.size()));
    return it->second;
  };
  std::vector<uint32_t> hyp_ids;
  hyp_ids.reserve(hyp.size());
  for (const auto& w : hyp) hyp_ids.push_back(intern(w));
  ref_ids.clear();
  ref_ids.reserve(ref.size());
  for (const auto& w : ref) ref_ids.push_back(intern(w));
  return hyp_ids;
}

inline std::vector<char32_t> metric_chars(std::string_view s) {
  std::vector<char32_t> out;
  for (char32_t c : utf8_decode(s))
    if (!is_ascii_space(c)) out.push_back(c);
  return out;
}

}  // namespace detail

// Character/word n-gram F-score: per order, precision and recall come from
// clipped matches; the F_beta values are averaged uniformly over character
// orders 1..char_ngram_order and word orders 1..word_ngram_order. Orders with
// no n-grams on either side do not enter the average, which makes the score
// of a string against itself exactly 1 regardless of length.
inline double chrfpp(std::string_view hypothesis, std::string_view reference,
                     const MetricConfig& cfg = {}) {
  cfg.validate();
  if (reference.empty()) throw EmptyReference("chrfpp: reference is empty");

  const auto hyp_chars = detail::metric_chars(hypothesis);
  const auto ref_chars = detail::metric_chars(reference);
  std::vector<uint32_t> ref_words;
  const auto hyp_words = detail::word_ids_joint(
      metric_words(hypothesis), metric_words(reference), ref_words);

  double sum = 0.0;
  int counted = 0;
  for (int n = 1; n <= cfg.char_ngram_order; ++n) {
    const auto st = detail::ngram_stats(hyp_chars, ref_chars, n);
    if (st.hyp_total == 0 && st.ref_total == 0) continue;
    sum += detail::f_beta(st, cfg.beta);
    ++counted;
  }
  for (int n = 1; n <= cfg.word_ngram_order; ++n) {
    const auto st = detail::ngram_stats(hyp_words, ref_words, n);
    if (st.hyp_total == 0 && st.ref_total == 0) continue;
    sum += detail::f_beta(st, cfg.beta);
    ++counted;
  }
  const double score = counted > 0 ? sum / counted : 0.0;
  return cfg.scale == Scale::Percent ? score * 100.0 : score;
}

// 4-gram BLEU in [0, 1]: geometric mean of clipped precisions with a brevity
// penalty. Zero 1-gram matches floor the score at 0; higher orders with zero
// matches are add-one smoothed, (m+1)/(t+1), which also covers hypotheses
// shorter than the order.
inline double bleu(std::string_view hypothesis, std::string_view reference) {
  constexpr int kOrder = 4;
  std::vector<uint32_t> ref_words;
  const auto hyp_words = detail::word_ids_joint(
      metric_words(hypothesis), metric_words(reference), ref_words);
  if (hyp_words.empty()) return 0.0;

  double log_precision = 0.0;
  for (int n = 1; n <= kOrder; ++n) {
    const auto st = detail::ngram_stats(hyp_words, ref_words, n);
    if (n == 1 && st.matched == 0) return 0.0;
    const double p =
        st.matched > 0
            ? static_cast<double>(st.matched) / static_cast<double>(st.hyp_total)
            : 1.0 / static_cast<double>(st.hyp_total + 1);
    log_precision += std::log(p);
  }
  const double ratio = static_cast<double>(ref_words.size()) /
                       static_cast<double>(hyp_words.size());
  const double brevity = ratio > 1.0 ? std::exp(1.0 - ratio) : 1.0;
  return brevity * std::exp(log_precision / kOrder);
}

// Reference-based ChrF++ wrapped as a MetricFn.
inline MetricFn chrfpp_metric(const MetricConfig& cfg = {}) {
  return MetricFn{
      "chrfpp",
      [cfg](std::string_view hyp, std::string_view /*source*/,
            const std::optional<std::string>& ref) {
        if (!ref)
          throw MissingReference("chrfpp metric requires an english reference");
        return chrfpp(hyp, *ref, cfg);
      }};
}

// Table-backed metric standing in for learned scorers. Keys are exact
// (hypothesis, source) pairs; a miss is an error, not a zero.
inline MetricFn stub_metric(
    std::string name,
    std::map<std::pair<std::string, std::string>, double> table) {
  for (const auto& [key, value] : table) {
    if (value < 0.0 || value > 1.0)
      throw ConfigError("stub metric '" + name +
                        "': table values must lie in [0, 1]");
  }
  auto shared =
      std::make_shared<std::map<std::pair<std::string, std::string>, double>>(
          std::move(table));
  return MetricFn{
      std::move(name),
      [shared](std::string_view hyp, std::string_view source,
               const std::optional<std::string>& /*ref*/) {
        auto it = shared->find({std::string(hyp), std::string(source)});
        if (it == shared->end())
          throw UnknownPair("stub metric: no entry for hypothesis/source pair");
        return it->second;
      }};
}

}  // namespace pivot
