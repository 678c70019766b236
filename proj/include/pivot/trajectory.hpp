#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pivot/errors.hpp"
#include "pivot/text.hpp"

namespace pivot {

inline constexpr std::string_view kOpenTag = "<english_translation>";
inline constexpr std::string_view kCloseTag = "</english_translation>";

struct Problem {
  std::string id;
  std::string source_text;
  std::optional<std::string> english_reference;
  std::string gold_answer;
  std::string language_tag;
};

// Half-open token index range [begin, end).
struct TokenSpan {
  size_t begin = 0;
  size_t end = 0;

  size_t size() const { return end - begin; }
  bool contains(size_t i) const { return i >= begin && i < end; }
  bool operator==(const TokenSpan&) const = default;
};

// One rollout: a token sequence whose text splits into a tagged translation
// segment followed by a reasoning segment.
struct Trajectory {
  std::string problem_id;
  std::vector<int> tokens;
  std::string text;
  std::optional<TokenSpan> trans_span;
  TokenSpan reason_span;
  std::vector<double> old_logprobs;
};

enum class FailureReason {
  MissingOpenTag,
  MissingCloseTag,
  MultiplePairs,
  EmptyTranslation,
  None,
};

inline const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::MissingOpenTag: return "missing_open_tag";
    case FailureReason::MissingCloseTag: return "missing_close_tag";
    case FailureReason::MultiplePairs: return "multiple_pairs";
    case FailureReason::EmptyTranslation: return "empty_translation";
    case FailureReason::None: return "none";
  }
  return "unknown";
}

struct ParseOutcome {
  std::optional<std::string> translation_text;
  std::string reasoning_text;
  bool well_formed = false;
  FailureReason failure_reason = FailureReason::None;
};

namespace detail {

inline size_t count_occurrences(std::string_view text, std::string_view pat) {
  size_t n = 0;
  size_t pos = text.find(pat);
  while (pos != std::string_view::npos) {
    ++n;
    pos = text.find(pat, pos + pat.size());
  }
  return n;
}

}  // namespace detail

// Splits a rollout text at the translation tags. The translation must be
// enclosed by exactly one open/close tag pair; anything else is a structural
// failure recorded in failure_reason, never thrown. A whitespace-only
// translation body counts as empty. On failure the whole text is treated as
// the reasoning segment.
inline ParseOutcome parse_trajectory(std::string_view text) {
  ParseOutcome out;
  out.reasoning_text = std::string(text);

  const size_t opens = detail::count_occurrences(text, kOpenTag);
  const size_t closes = detail::count_occurrences(text, kCloseTag);
  if (opens == 0) {
    out.failure_reason = FailureReason::MissingOpenTag;
    return out;
  }
  if (closes == 0) {
    out.failure_reason = FailureReason::MissingCloseTag;
    return out;
  }
  if (opens > 1 || closes > 1) {
    out.failure_reason = FailureReason::MultiplePairs;
    return out;
  }

  const size_t open_pos = text.find(kOpenTag);
  const size_t close_pos = text.find(kCloseTag);
  if (close_pos < open_pos + kOpenTag.size()) {
    // Close tag does not follow the open tag.
    out.failure_reason = FailureReason::MissingCloseTag;
    return out;
  }

  const size_t body_begin = open_pos + kOpenTag.size();
  std::string_view body = text.substr(body_begin, close_pos - body_begin);
  if (trim(body).empty()) {
    out.failure_reason = FailureReason::EmptyTranslation;
    return out;
  }

  out.translation_text = std::string(body);
  out.reasoning_text = std::string(text.substr(close_pos + kCloseTag.size()));
  out.well_formed = true;
  out.failure_reason = FailureReason::None;
  return out;
}

// Lossless reference tokenizer: a token is an optional whitespace run glued to
// one atom, where an atom is a whole translation tag, a maximal alnum run
// (bytes >= 0x80 count as word bytes), or a single other character. Trailing
// whitespace becomes a final whitespace-only token. Concatenating the output
// always reproduces the input byte for byte.
inline std::vector<std::string> fixture_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  auto is_word_byte = [](unsigned char c) {
    return is_ascii_alnum(c) || c == '_' || c >= 0x80;
  };
  while (i < text.size()) {
    const size_t start = i;
    while (i < text.size() &&
           is_ascii_space(static_cast<unsigned char>(text[i])))
      ++i;
    if (i == text.size()) {
      tokens.emplace_back(text.substr(start));
      break;
    }
    if (text.substr(i).starts_with(kOpenTag)) {
      i += kOpenTag.size();
    } else if (text.substr(i).starts_with(kCloseTag)) {
      i += kCloseTag.size();
    } else if (is_word_byte(static_cast<unsigned char>(text[i]))) {
      while (i < text.size() &&
             is_word_byte(static_cast<unsigned char>(text[i])))
        ++i;
    } else {
      ++i;
    }
    tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

struct SpanLayout {
  std::optional<TokenSpan> trans;
  TokenSpan reason;
};

// Maps the parsed segment boundaries onto token indices. The translation span
// runs from the token holding the open tag's first byte through the token
// holding the close tag's last byte, inclusive; every later token belongs to
// the reasoning span. Ill-formed parses put all tokens in the reasoning span.
inline SpanLayout locate_spans(std::span<const std::string> token_texts,
                               std::string_view text,
                               const ParseOutcome& parse) {
  size_t total = 0;
  for (const auto& t : token_texts) total += t.size();
  if (total != text.size() ||
      [&] {
        size_t off = 0;
        for (const auto& t : token_texts) {
          if (text.substr(off, t.size()) != t) return true;
          off += t.size();
        }
        return false;
      }()) {
    throw SpanMismatch("token texts do not concatenate to the rollout text");
  }

  const size_t n = token_texts.size();
  if (!parse.well_formed) return SpanLayout{std::nullopt, TokenSpan{0, n}};

  const size_t open_begin = text.find(kOpenTag);
  const size_t close_last = text.find(kCloseTag) + kCloseTag.size() - 1;

  auto token_at = [&](size_t byte_pos) {
    size_t off = 0;
    for (size_t i = 0; i < n; ++i) {
      off += token_texts[i].size();
      if (byte_pos < off) return i;
    }
    return n == 0 ? size_t{0} : n - 1;
  };

  const size_t first = token_at(open_begin);
  const size_t last = token_at(close_last);
  return SpanLayout{TokenSpan{first, last + 1}, TokenSpan{last + 1, n}};
}

}  // namespace pivot
