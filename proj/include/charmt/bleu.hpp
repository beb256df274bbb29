#pragma once

// Corpus BLEU: clipped n-gram precision up to order 4, geometric mean,
// exponential brevity penalty, no smoothing. Text is tokenized by putting
// spaces around every ASCII punctuation character and splitting on
// whitespace.

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "charmt/chrf.hpp"
#include "charmt/error.hpp"
#include "charmt/parallel.hpp"
#include "charmt/text.hpp"

namespace charmt {

inline constexpr int kBleuMaxOrder = 4;

inline std::vector<std::string> bleu_tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (char32_t c : text::decode_utf8(sentence)) {
    if (text::is_space(c)) {
      flush();
    } else if (text::is_ascii_punct(c)) {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    } else {
      text::append_utf8(cur, c);
    }
  }
  flush();
  return tokens;
}

struct BleuStats {
  long long hyp_len = 0;
  long long ref_len = 0;
  long long matches[kBleuMaxOrder] = {};
  long long totals[kBleuMaxOrder] = {};

  BleuStats& operator+=(const BleuStats& o) {
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
    for (int n = 0; n < kBleuMaxOrder; ++n) {
      matches[n] += o.matches[n];
      totals[n] += o.totals[n];
    }
    return *this;
  }
};

inline BleuStats bleu_statistics(std::string_view hypothesis, std::string_view reference) {
  const auto hyp = bleu_tokenize(hypothesis);
  const auto ref = bleu_tokenize(reference);
  if (ref.empty()) throw ValidationError("BLEU: empty reference");
  BleuStats s;
  s.hyp_len = static_cast<long long>(hyp.size());
  s.ref_len = static_cast<long long>(ref.size());
  for (std::size_t n = 1; n <= kBleuMaxOrder; ++n) {
    std::map<std::vector<std::string>, long long> ref_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i) {
      ++ref_counts[std::vector<std::string>(ref.begin() + i, ref.begin() + i + n)];
    }
    std::map<std::vector<std::string>, long long> hyp_counts;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
      ++hyp_counts[std::vector<std::string>(hyp.begin() + i, hyp.begin() + i + n)];
    }
    for (const auto& [ng, c] : hyp_counts) {
      s.totals[n - 1] += c;
      if (auto it = ref_counts.find(ng); it != ref_counts.end()) {
        s.matches[n - 1] += std::min(c, it->second);
      }
    }
  }
  return s;
}

/// 0 whenever any order has no matches or the hypothesis side is empty.
inline double bleu_from_statistics(const BleuStats& s) {
  if (s.hyp_len == 0) return 0.0;
  double log_sum = 0;
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    if (s.matches[n] == 0 || s.totals[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]));
  }
  const double bp = s.hyp_len < s.ref_len
                        ? std::exp(1.0 - static_cast<double>(s.ref_len) /
                                             static_cast<double>(s.hyp_len))
                        : 1.0;
  return 100.0 * bp * std::exp(log_sum / kBleuMaxOrder);
}

inline MetricScore bleu(std::span<const std::string> hypotheses,
                        std::span<const std::string> references, bool per_sentence = false,
                        unsigned threads = 1) {
  if (hypotheses.size() != references.size()) {
    throw ValidationError("BLEU: " + std::to_string(hypotheses.size()) + " hypotheses for " +
                          std::to_string(references.size()) + " references");
  }
  std::vector<BleuStats> stats(hypotheses.size());
  parallel_for(hypotheses.size(), threads,
               [&](std::size_t i) { stats[i] = bleu_statistics(hypotheses[i], references[i]); });
  BleuStats total;
  for (const auto& s : stats) total += s;
  MetricScore out;
  out.value = bleu_from_statistics(total);
  if (per_sentence) {
    std::vector<double> scores;
    scores.reserve(stats.size());
    for (const auto& s : stats) scores.push_back(bleu_from_statistics(s));
    out.per_sentence = std::move(scores);
  }
  return out;
}

}  // namespace charmt
