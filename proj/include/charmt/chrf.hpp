#pragma once

// chrF / chrF++ (Popović 2015, 2017). Character n-grams are taken over the
// sentence with all whitespace removed; word n-grams over whitespace tokens
// with one leading or trailing ASCII punctuation mark split off. Each order
// contributes an F-beta score and the result is their arithmetic mean.
//
// Statistics follow the widely used Python implementation: the hypothesis
// n-gram count of an order is recorded as zero when the reference has no
// n-grams of that order, and corpus scores sum statistics over sentences
// before computing F.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "charmt/error.hpp"
#include "charmt/parallel.hpp"
#include "charmt/text.hpp"

namespace charmt {

struct ChrfParams {
  int char_order = 6;
  int word_order = 2;  // 0 gives plain chrF
  double beta = 2.0;

  void validate() const {
    if (char_order < 1) throw ValidationError("chrF char_order must be >= 1");
    if (word_order < 0) throw ValidationError("chrF word_order must be >= 0");
    if (!(beta > 0)) throw ValidationError("chrF beta must be positive");
  }

  int orders() const { return char_order + word_order; }
};

struct MetricScore {
  double value = 0;
  std::optional<std::vector<double>> per_sentence;
};

/// Hypothesis, reference and matched n-gram counts for one order.
struct NgramStats {
  long long hyp = 0;
  long long ref = 0;
  long long match = 0;

  NgramStats& operator+=(const NgramStats& o) {
    hyp += o.hyp;
    ref += o.ref;
    match += o.match;
    return *this;
  }
};

/// Character orders first, then word orders.
using ChrfStats = std::vector<NgramStats>;

namespace chrf_detail {

template <typename Key>
using Counts = std::unordered_map<Key, long long>;

inline std::vector<Counts<std::u32string>> char_ngrams(std::string_view sentence, int max_order) {
  std::u32string chars;
  for (char32_t c : text::decode_utf8(sentence)) {
    if (!text::is_space(c)) chars.push_back(c);
  }
  std::vector<Counts<std::u32string>> out(static_cast<std::size_t>(max_order));
  for (int n = 1; n <= max_order; ++n) {
    auto& counts = out[static_cast<std::size_t>(n - 1)];
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= chars.size(); ++i) ++counts[chars.substr(i, un)];
  }
  return out;
}

/// Whitespace split, then one edge punctuation mark separated from words of
/// two or more characters (trailing mark checked first).
inline std::vector<std::string> chrf_words(std::string_view sentence) {
  std::vector<std::string> out;
  for (const auto& w : text::split_whitespace(sentence)) {
    const auto cps = text::decode_utf8(w);
    if (cps.size() == 1) {
      out.push_back(w);
    } else if (text::is_ascii_punct(cps.back())) {
      out.push_back(text::encode_utf8(std::u32string_view(cps).substr(0, cps.size() - 1)));
      out.push_back(text::encode_utf8(std::u32string_view(cps).substr(cps.size() - 1)));
    } else if (text::is_ascii_punct(cps.front())) {
      out.push_back(text::encode_utf8(std::u32string_view(cps).substr(0, 1)));
      out.push_back(text::encode_utf8(std::u32string_view(cps).substr(1)));
    } else {
      out.push_back(w);
    }
  }
  return out;
}

inline std::vector<Counts<std::string>> word_ngrams(std::string_view sentence, int max_order) {
  const auto words = chrf_words(sentence);
  std::vector<Counts<std::string>> out(static_cast<std::size_t>(max_order));
  for (int n = 1; n <= max_order; ++n) {
    auto& counts = out[static_cast<std::size_t>(n - 1)];
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= words.size(); ++i) {
      std::string key = words[i];
      for (std::size_t k = 1; k < un; ++k) {
        key += ' ';
        key += words[i + k];
      }
      ++counts[key];
    }
  }
  return out;
}

template <typename Key>
NgramStats match(const Counts<Key>& hyp, const Counts<Key>& ref) {
  NgramStats s;
  long long hyp_total = 0;
  for (const auto& [ng, c] : hyp) {
    hyp_total += c;
    if (auto it = ref.find(ng); it != ref.end()) s.match += std::min(c, it->second);
  }
  for (const auto& [_, c] : ref) s.ref += c;
  s.hyp = ref.empty() ? 0 : hyp_total;
  return s;
}

inline bool blank(std::string_view s) {
  for (char32_t c : text::decode_utf8(s)) {
    if (!text::is_space(c)) return false;
  }
  return true;
}

}  // namespace chrf_detail

/// Per-order statistics for one hypothesis/reference pair.
inline ChrfStats chrf_statistics(std::string_view hypothesis, std::string_view reference,
                                 const ChrfParams& params = {}) {
  params.validate();
  if (chrf_detail::blank(reference)) throw ValidationError("chrF: empty reference");
  ChrfStats stats;
  stats.reserve(static_cast<std::size_t>(params.orders()));
  const auto hc = chrf_detail::char_ngrams(hypothesis, params.char_order);
  const auto rc = chrf_detail::char_ngrams(reference, params.char_order);
  for (std::size_t i = 0; i < hc.size(); ++i) stats.push_back(chrf_detail::match(hc[i], rc[i]));
  if (params.word_order > 0) {
    const auto hw = chrf_detail::word_ngrams(hypothesis, params.word_order);
    const auto rw = chrf_detail::word_ngrams(reference, params.word_order);
    for (std::size_t i = 0; i < hw.size(); ++i) stats.push_back(chrf_detail::match(hw[i], rw[i]));
  }
  return stats;
}

/// Mean per-order F-beta, scaled to [0, 100]. An order without hypothesis or
/// reference n-grams, or without matches, contributes 0.
inline double chrf_from_statistics(const ChrfStats& stats, const ChrfParams& params = {}) {
  if (stats.size() != static_cast<std::size_t>(params.orders())) {
    throw InvariantError("chrF statistics do not match the requested orders");
  }
  const double b2 = params.beta * params.beta;
  double total = 0;
  for (const auto& s : stats) {
    if (s.hyp <= 0 || s.ref <= 0 || s.match <= 0) continue;
    const double p = static_cast<double>(s.match) / static_cast<double>(s.hyp);
    const double r = static_cast<double>(s.match) / static_cast<double>(s.ref);
    total += (1 + b2) * p * r / (b2 * p + r);
  }
  return 100.0 * total / static_cast<double>(stats.size());
}

inline double chrf_sentence(std::string_view hypothesis, std::string_view reference,
                            const ChrfParams& params = {}) {
  return chrf_from_statistics(chrf_statistics(hypothesis, reference, params), params);
}

/// Corpus chrF(++) over aligned hypothesis/reference lists. Sentence
/// statistics may be computed on `threads` workers; they are summed in corpus
/// order.
inline MetricScore chrf_pp(std::span<const std::string> hypotheses,
                           std::span<const std::string> references, const ChrfParams& params = {},
                           bool per_sentence = false, unsigned threads = 1) {
  params.validate();
  if (hypotheses.size() != references.size()) {
    throw ValidationError("chrF: " + std::to_string(hypotheses.size()) + " hypotheses for " +
                          std::to_string(references.size()) + " references");
  }
  std::vector<ChrfStats> sentence_stats(hypotheses.size());
  parallel_for(hypotheses.size(), threads, [&](std::size_t i) {
    sentence_stats[i] = chrf_statistics(hypotheses[i], references[i], params);
  });
  ChrfStats total(static_cast<std::size_t>(params.orders()));
  for (const auto& s : sentence_stats) {
    for (std::size_t k = 0; k < s.size(); ++k) total[k] += s[k];
  }
  MetricScore out;
  out.value = chrf_from_statistics(total, params);
  if (per_sentence) {
    std::vector<double> scores;
    scores.reserve(sentence_stats.size());
    for (const auto& s : sentence_stats) scores.push_back(chrf_from_statistics(s, params));
    out.per_sentence = std::move(scores);
  }
  return out;
}

}  // namespace charmt
