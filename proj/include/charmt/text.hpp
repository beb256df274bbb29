#pragma once

// UTF-8 and tokenization helpers shared by the metric and analysis modules.
// Text is never normalized; these functions only segment and compare.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace charmt::text {

inline constexpr char32_t kReplacementChar = 0xFFFD;

struct Decoded {
  char32_t cp;
  std::size_t len;
};

/// Decodes the code point starting at byte `i`. An invalid sequence yields
/// U+FFFD with length 1.
inline Decoded decode_at(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min_cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
    min_cp = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
    min_cp = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
    min_cp = 0x10000;
  } else {
    return {kReplacementChar, 1};
  }
  if (i + len > s.size()) return {kReplacementChar, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {kReplacementChar, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return {kReplacementChar, 1};
  }
  return {cp, len};
}

/// Decodes UTF-8 into code points. Invalid sequences decode to U+FFFD, one per
/// offending byte, so the function is total.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto d = decode_at(s, i);
    out.push_back(d.cp);
    i += d.len;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) append_utf8(out, cp);
  return out;
}

/// Number of code points in a UTF-8 string.
inline std::size_t length(std::string_view s) { return decode_utf8(s).size(); }

/// Same set as Python's str.isspace(), which is what whitespace splitting in
/// the reference metric implementations uses.
constexpr bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || (c >= 0x1C && c <= 0x20) || c == 0x85 ||
         c == 0xA0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) ||
         c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

/// ASCII punctuation (Python's string.punctuation).
constexpr bool is_ascii_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
         (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
}

/// Punctuation stripped from word edges for word-level analyses: ASCII
/// punctuation plus common typographic quotes, dashes and marks.
constexpr bool is_edge_punct(char32_t c) {
  if (is_ascii_punct(c)) return true;
  switch (c) {
    case 0x00A1:  // ¡
    case 0x00AB:  // «
    case 0x00B7:  // ·
    case 0x00BB:  // »
    case 0x00BF:  // ¿
    case 0x2013:  // –
    case 0x2014:  // em dash
    case 0x2018:  // ‘
    case 0x2019:  // ’
    case 0x201A:  // ‚
    case 0x201C:  // “
    case 0x201D:  // ”
    case 0x201E:  // „
    case 0x2026:  // …
    case 0x2039:  // ‹
    case 0x203A:  // ›
    case 0x3001:  // 、
    case 0x3002:  // 。
    case 0xFF01:  // ！
    case 0xFF0C:  // ，
    case 0xFF1F:  // ？
      return true;
    default:
      return false;
  }
}

/// Simple one-to-one lowercase mapping covering Latin (Basic, Latin-1,
/// Extended-A), Greek and Cyrillic. Other scripts are returned unchanged.
constexpr char32_t fold_case(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c < 0xC0) return c;
  if ((c >= 0xC0 && c <= 0xDE) && c != 0xD7) return c + 0x20;
  if (c >= 0x100 && c <= 0x17F) {
    // Mostly even/odd case pairs; the 0x139..0x148 and 0x179..0x17E runs are
    // odd/even and U+0130, U+0131, U+0138, U+0149, U+017F have no simple pair.
    if (c == 0x130) return 'i';
    if (c == 0x131 || c == 0x138 || c == 0x149 || c == 0x17F) return c;
    if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) {
      return (c % 2 == 1) ? c + 1 : c;
    }
    if (c == 0x178) return 0xFF;
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 0x20;
  if (c >= 0x386 && c <= 0x38F) {
    switch (c) {
      case 0x386: return 0x3AC;
      case 0x388: return 0x3AD;
      case 0x389: return 0x3AE;
      case 0x38A: return 0x3AF;
      case 0x38C: return 0x3CC;
      case 0x38E: return 0x3CD;
      case 0x38F: return 0x3CE;
      default: return c;
    }
  }
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  if (c >= 0x460 && c <= 0x4FF) {
    // Cyrillic extended blocks are even/odd pairs except U+04C0..U+04CE.
    if (c == 0x4C0) return 0x4CF;
    if (c >= 0x4C1 && c <= 0x4CE) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x482 && c <= 0x489) return c;
    return (c % 2 == 0) ? c + 1 : c;
  }
  return c;
}

inline std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : decode_utf8(s)) append_utf8(out, fold_case(cp));
  return out;
}

/// Byte range of one whitespace-delimited token and of its core once edge
/// punctuation is stripped. `core_begin == core_end` for punctuation-only
/// tokens.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t core_begin = 0;
  std::size_t core_end = 0;
};

/// Splits on Unicode whitespace, reporting byte offsets into `s`.
inline std::vector<TokenSpan> token_spans(std::string_view s) {
  struct Cp {
    char32_t c;
    std::size_t off;
    std::size_t len;
  };
  std::vector<Cp> cps;
  for (std::size_t i = 0; i < s.size();) {
    const auto d = decode_at(s, i);
    cps.push_back({d.cp, i, d.len});
    i += d.len;
  }
  std::vector<TokenSpan> spans;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_space(cps[i].c)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && !is_space(cps[j].c)) ++j;
    std::size_t a = i;
    std::size_t b = j;
    while (a < b && is_edge_punct(cps[a].c)) ++a;
    while (b > a && is_edge_punct(cps[b - 1].c)) --b;
    TokenSpan t;
    t.begin = cps[i].off;
    t.end = cps[j - 1].off + cps[j - 1].len;
    t.core_begin = (a < b) ? cps[a].off : t.end;
    t.core_end = (a < b) ? cps[b - 1].off + cps[b - 1].len : t.end;
    spans.push_back(t);
    i = j;
  }
  return spans;
}

/// Whitespace tokens, verbatim.
inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : token_spans(s)) out.emplace_back(s.substr(t.begin, t.end - t.begin));
  return out;
}

/// Whitespace tokens with edge punctuation removed. Punctuation-only tokens
/// become empty strings so that indices still line up with the aligner's
/// whitespace tokenization.
inline std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : token_spans(s)) {
    out.emplace_back(s.substr(t.core_begin, t.core_end - t.core_begin));
  }
  return out;
}

}  // namespace charmt::text
