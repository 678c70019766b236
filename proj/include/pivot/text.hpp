#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pivot {

inline bool is_ascii_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v';
}

inline bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

inline bool is_ascii_alnum(char32_t c) {
  return is_ascii_digit(c) || (c >= U'a' && c <= U'z') ||
         (c >= U'A' && c <= U'Z');
}

inline bool is_ascii_punct(char32_t c) {
  return c < 128 && !is_ascii_alnum(c) && !is_ascii_space(c) && c >= U'!';
}

// Decodes UTF-8 into code points. Invalid bytes are passed through one at a
// time as their raw value, so decoding never fails and every byte is kept.
inline std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    unsigned char b = static_cast<unsigned char>(s[i]);
    uint32_t cp = b;
    size_t extra = 0;
    if (b >= 0xF0)
      cp = b & 0x07, extra = 3;
    else if (b >= 0xE0)
      cp = b & 0x0F, extra = 2;
    else if (b >= 0xC0)
      cp = b & 0x1F, extra = 1;
    if (extra > 0 && i + extra < s.size() + 1) {
      bool ok = i + extra < s.size();
      for (size_t k = 1; ok && k <= extra; ++k) {
        unsigned char c = static_cast<unsigned char>(s[i + k]);
        if ((c & 0xC0) != 0x80) ok = false;
      }
      if (ok) {
        for (size_t k = 1; k <= extra; ++k)
          cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
        out.push_back(static_cast<char32_t>(cp));
        i += extra + 1;
        continue;
      }
    }
    out.push_back(static_cast<char32_t>(b));
    ++i;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && is_ascii_space(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && is_ascii_space(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
  return out;
}

// Whitespace-split into pieces (no punctuation handling).
inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(static_cast<unsigned char>(s[i])))
      ++i;
    size_t start = i;
    while (i < s.size() && !is_ascii_space(static_cast<unsigned char>(s[i])))
      ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace pivot
