#pragma once

#include <string_view>

namespace charmt {

inline constexpr std::string_view kVersion = "1.0.0";
/// Version of the corpus, alignment, attribution and score-table formats.
inline constexpr int kFormatVersion = 1;

}  // namespace charmt
