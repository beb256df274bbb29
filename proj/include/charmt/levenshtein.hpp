#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "charmt/text.hpp"

namespace charmt {

/// Unit-cost edit distance over code points (insert, delete, substitute).
inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return a.size();
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i + 1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::size_t up = row[j + 1];
      const std::size_t sub = diag + (a[i] == b[j] ? 0 : 1);
      row[j + 1] = std::min({sub, up + 1, row[j] + 1});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(text::decode_utf8(a), text::decode_utf8(b));
}

/// 1 - distance / max(len); two empty strings are identical (1.0).
/// Computed as (max - distance) / max so that equal ratios give equal doubles.
inline double orthographic_similarity(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  const std::size_t d = levenshtein(a, b);
  return static_cast<double>(longest - d) / static_cast<double>(longest);
}

inline double orthographic_similarity(std::string_view a, std::string_view b) {
  return orthographic_similarity(text::decode_utf8(a), text::decode_utf8(b));
}

}  // namespace charmt
