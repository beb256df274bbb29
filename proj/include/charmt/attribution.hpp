#pragma once

// Source-versus-target contribution analytics over byte-level gradient-norm
// attributions. Every step's norms are reduced to a source share and a target
// share that sum to one; position curves, in-word profiles and the
// similar-word analysis are built from those shares.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "charmt/corpus_io.hpp"
#include "charmt/error.hpp"
#include "charmt/parallel.hpp"
#include "charmt/text.hpp"
#include "charmt/word_accuracy.hpp"

namespace charmt {

struct StepShare {
  double source_share = 0;
  double target_share = 0;
};

struct AttributionOptions {
  /// Leave out the last (end-of-sentence) step from position statistics.
  bool drop_eos = false;
  /// Leave out the first prompt_len source norms of every step.
  bool drop_prompt = false;
};

namespace attr_detail {

inline double sum(std::span<const double> xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s;
}

inline std::size_t source_offset(const AttributionRecord& r, const AttributionOptions& opts) {
  return opts.drop_prompt ? r.prompt_len : 0;
}

inline std::size_t used_steps(const AttributionRecord& r, const AttributionOptions& opts) {
  if (opts.drop_eos && !r.steps.empty()) return r.steps.size() - 1;
  return r.steps.size();
}

}  // namespace attr_detail

/// Per-step share of summed source norms against summed source + target
/// norms. Step 0 has an empty target prefix, so its source share is 1.
inline std::vector<StepShare> step_shares(const AttributionRecord& record,
                                          const AttributionOptions& opts = {}) {
  std::vector<StepShare> out;
  out.reserve(record.steps.size());
  const std::size_t off = attr_detail::source_offset(record, opts);
  for (std::size_t t = 0; t < record.steps.size(); ++t) {
    const auto& step = record.steps[t];
    if (off > step.src_norms.size()) {
      throw ValidationError("attribution record '" + record.id + "': prompt longer than source");
    }
    const double src = attr_detail::sum(std::span(step.src_norms).subspan(off));
    const double tgt = attr_detail::sum(step.tgt_norms);
    const double total = src + tgt;
    if (!(total > 0)) {
      throw ValidationError("attribution record '" + record.id + "' step " + std::to_string(t) +
                            ": no positive norm mass");
    }
    out.push_back({src / total, tgt / total});
  }
  return out;
}

/// Mean source share per in-sentence byte position, with a trailing rolling
/// mean (positions t-window+1 .. t, truncated at the start).
struct PositionCurve {
  std::vector<double> raw;
  std::vector<double> smoothed;
  std::vector<std::size_t> support;  // records with a step at this position
  std::size_t window = 1;
};

inline std::vector<double> trailing_mean(std::span<const double> xs, std::size_t window) {
  std::vector<double> out(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const std::size_t lo = t + 1 >= window ? t + 1 - window : 0;
    double s = 0;
    for (std::size_t k = lo; k <= t; ++k) s += xs[k];
    out[t] = s / static_cast<double>(t - lo + 1);
  }
  return out;
}

namespace attr_detail {

inline std::vector<std::vector<StepShare>> all_shares(std::span<const AttributionRecord> records,
                                                      const AttributionOptions& opts,
                                                      unsigned threads) {
  std::vector<std::vector<StepShare>> shares(records.size());
  parallel_for(records.size(), threads,
               [&](std::size_t i) { shares[i] = step_shares(records[i], opts); });
  return shares;
}

inline PositionCurve curve_from_shares(std::span<const AttributionRecord> records,
                                       const std::vector<std::vector<StepShare>>& shares,
                                       std::size_t window, const AttributionOptions& opts) {
  PositionCurve curve;
  curve.window = window;
  std::vector<double> sums;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t n = used_steps(records[i], opts);
    if (sums.size() < n) {
      sums.resize(n, 0.0);
      curve.support.resize(n, 0);
    }
    for (std::size_t t = 0; t < n; ++t) {
      sums[t] += shares[i][t].source_share;
      ++curve.support[t];
    }
  }
  curve.raw.resize(sums.size());
  for (std::size_t t = 0; t < sums.size(); ++t) {
    curve.raw[t] = sums[t] / static_cast<double>(curve.support[t]);
  }
  curve.smoothed = trailing_mean(curve.raw, window);
  return curve;
}

}  // namespace attr_detail

inline PositionCurve sentence_position_curve(std::span<const AttributionRecord> records,
                                             std::size_t window = 10,
                                             const AttributionOptions& opts = {},
                                             unsigned threads = 1) {
  if (records.empty()) throw ValidationError("position curve: no attribution records");
  if (window < 1) throw ValidationError("position curve: window must be >= 1");
  const auto shares = attr_detail::all_shares(records, opts, threads);
  return attr_detail::curve_from_shares(records, shares, window, opts);
}

struct WordSpan {
  std::size_t start_byte = 0;
  std::size_t end_byte = 0;  // inclusive
  std::size_t word_index = 0;

  friend bool operator==(const WordSpan&, const WordSpan&) = default;
};

/// Maximal runs of bytes other than ASCII space, tab and newline. UTF-8
/// continuation bytes are never whitespace, so characters are never split.
inline std::vector<WordSpan> segment_words(std::span<const std::uint8_t> bytes) {
  auto ws = [](std::uint8_t b) { return b == ' ' || b == '\t' || b == '\n'; };
  std::vector<WordSpan> spans;
  std::size_t i = 0;
  while (i < bytes.size()) {
    if (ws(bytes[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < bytes.size() && !ws(bytes[j])) ++j;
    spans.push_back({i, j - 1, spans.size()});
    i = j;
  }
  return spans;
}

namespace attr_detail {

/// Generated text without the trailing end-of-sentence byte.
inline std::span<const std::uint8_t> generated_text(const AttributionRecord& r) {
  std::span<const std::uint8_t> all(r.target_bytes);
  return all.empty() ? all : all.first(all.size() - 1);
}

inline double curve_at(const PositionCurve& curve, std::size_t t, const std::string& id) {
  if (t >= curve.raw.size()) {
    throw ValidationError("position curve does not cover position " + std::to_string(t) +
                          " needed by record '" + id + "'");
  }
  const double c = curve.raw[t];
  if (!(c > 0)) {
    throw ValidationError("position curve is zero at position " + std::to_string(t) +
                          " needed by record '" + id + "'");
  }
  return c;
}

}  // namespace attr_detail

struct InWordPoint {
  std::size_t position = 0;  // byte offset within the word
  double relative_pct = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;
};

/// Mean of source_share(t) / curve.raw(t), in percent, for generated bytes at
/// each in-word position 0..max_pos. Whitespace and end-of-sentence bytes
/// have no in-word position and are skipped.
inline std::vector<InWordPoint> in_word_relative_importance(
    std::span<const AttributionRecord> records, const PositionCurve& curve, std::size_t max_pos,
    const AttributionOptions& opts = {}, unsigned threads = 1) {
  const auto shares = attr_detail::all_shares(records, opts, threads);
  std::vector<double> sums(max_pos + 1, 0.0);
  std::vector<std::size_t> counts(max_pos + 1, 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::size_t limit = attr_detail::used_steps(r, opts);
    for (const auto& span : segment_words(attr_detail::generated_text(r))) {
      for (std::size_t b = span.start_byte; b <= span.end_byte && b < limit; ++b) {
        const std::size_t p = b - span.start_byte;
        if (p > max_pos) break;
        sums[p] += shares[i][b].source_share / attr_detail::curve_at(curve, b, r.id);
        ++counts[p];
      }
    }
  }
  std::vector<InWordPoint> out(max_pos + 1);
  for (std::size_t p = 0; p <= max_pos; ++p) {
    out[p].position = p;
    out[p].count = counts[p];
    if (counts[p] > 0) out[p].relative_pct = 100.0 * sums[p] / static_cast<double>(counts[p]);
  }
  return out;
}

/// Mean relative importance over every included step of every record
/// (support-weighted). Against the curve of the same records this is 100.
inline double mean_relative_importance(std::span<const AttributionRecord> records,
                                       const PositionCurve& curve,
                                       const AttributionOptions& opts = {}) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : records) {
    const auto shares = step_shares(r, opts);
    const std::size_t limit = attr_detail::used_steps(r, opts);
    for (std::size_t t = 0; t < limit; ++t) {
      sum += shares[t].source_share / attr_detail::curve_at(curve, t, r.id);
      ++n;
    }
  }
  if (n == 0) throw ValidationError("relative importance: no steps");
  return 100.0 * sum / static_cast<double>(n);
}

/// Relative source importance and source focus of one word class.
struct WordClassImportance {
  std::size_t n_words = 0;
  std::size_t n_bytes = 0;
  /// Mean position-normalized source share over the class's generated bytes.
  double relative_pct = std::numeric_limits<double>::quiet_NaN();
  /// Mean raw source share over the same bytes, in percent.
  double raw_pct = std::numeric_limits<double>::quiet_NaN();
  /// Mean fraction of per-step source norm mass on the aligned source word.
  double focus = std::numeric_limits<double>::quiet_NaN();
  bool flagged = true;  // no qualifying words
};

struct OswImportance {
  WordClassImportance osw;
  WordClassImportance non_osw;
  /// Qualifying pairs whose reference word was not found in the output.
  std::size_t unmatched = 0;
};

struct OswThresholds {
  double osw_min = 0.7;     // similarity strictly above is an OSW
  double nonosw_max = 0.3;  // similarity strictly below is a non-OSW
};

/// Splits aligned source-reference pairs into orthographically similar words
/// and dissimilar ones, maps each reference word onto the generated output by
/// in-order surface match, and averages attribution statistics over the
/// generated bytes of the matched words.
inline OswImportance osw_source_importance(std::span<const AttributionRecord> records,
                                           const Corpus& corpus, const AlignmentMap& src_ref,
                                           const OswThresholds& th = {},
                                           const AttributionOptions& opts = {},
                                           unsigned threads = 1) {
  if (records.empty()) throw ValidationError("OSW importance: no attribution records");
  const auto shares = attr_detail::all_shares(records, opts, threads);
  const auto curve = attr_detail::curve_from_shares(records, shares, 1, opts);

  struct Acc {
    std::size_t words = 0;
    std::size_t bytes = 0;
    double rel = 0;
    double raw = 0;
    double focus = 0;
    std::size_t focus_n = 0;
  } acc_osw, acc_non;
  OswImportance out;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto* rec = corpus.find(r.id);
    if (rec == nullptr) {
      throw ValidationError("attribution record '" + r.id + "' has no corpus record");
    }
    auto al = src_ref.find(r.id);
    if (al == src_ref.end()) {
      throw ValidationError("no source-reference alignment for record '" + r.id + "'");
    }
    const auto pairs = extract_word_pairs(*rec, al->second);

    // Locate the sentence inside the (possibly prompted) source bytes.
    const std::string_view src_bytes(reinterpret_cast<const char*>(r.source_bytes.data()),
                                     r.source_bytes.size());
    const std::size_t src_at = src_bytes.find(rec->source, r.prompt_len);
    if (src_at == std::string_view::npos) {
      throw ValidationError("attribution record '" + r.id +
                            "': corpus source text not found in source bytes");
    }
    const auto src_tokens = text::token_spans(rec->source);

    // Generated words and reference words, in order.
    const auto gen = attr_detail::generated_text(r);
    const std::string gen_text(gen.begin(), gen.end());
    const auto gen_tokens = text::token_spans(gen_text);
    std::vector<std::string> gen_words;
    for (const auto& t : gen_tokens) {
      gen_words.push_back(
          text::fold_case(std::string_view(gen_text).substr(t.core_begin, t.core_end - t.core_begin)));
    }
    const auto ref_words = text::word_tokens(rec->reference);
    std::vector<std::ptrdiff_t> ref_to_gen(ref_words.size(), -1);
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < ref_words.size(); ++k) {
      if (ref_words[k].empty()) continue;
      const auto want = text::fold_case(ref_words[k]);
      for (std::size_t j = cursor; j < gen_words.size(); ++j) {
        if (gen_words[j] == want) {
          ref_to_gen[k] = static_cast<std::ptrdiff_t>(j);
          cursor = j + 1;
          break;
        }
      }
    }

    const std::size_t off = attr_detail::source_offset(r, opts);
    const std::size_t limit = attr_detail::used_steps(r, opts);
    for (const auto& p : pairs) {
      Acc* acc = nullptr;
      if (p.similarity > th.osw_min) {
        acc = &acc_osw;
      } else if (p.similarity < th.nonosw_max) {
        acc = &acc_non;
      } else {
        continue;
      }
      if (ref_to_gen[p.ref_index] < 0) {
        ++out.unmatched;
        continue;
      }
      const auto& g = gen_tokens[static_cast<std::size_t>(ref_to_gen[p.ref_index])];
      const auto& s = src_tokens[p.src_index];
      const std::size_t w_lo = std::max(src_at + s.core_begin, off);
      const std::size_t w_hi = std::max(src_at + s.core_end, w_lo);
      ++acc->words;
      for (std::size_t t = g.core_begin; t < g.core_end && t < limit; ++t) {
        acc->rel += shares[i][t].source_share / attr_detail::curve_at(curve, t, r.id);
        acc->raw += shares[i][t].source_share;
        ++acc->bytes;
        const auto& norms = r.steps[t].src_norms;
        double total = 0;
        double on_word = 0;
        for (std::size_t b = off; b < norms.size(); ++b) {
          total += norms[b];
          if (b >= w_lo && b < w_hi) on_word += norms[b];
        }
        if (total > 0) {
          acc->focus += on_word / total;
          ++acc->focus_n;
        }
      }
    }
  }

  auto finish = [](const Acc& a, WordClassImportance& w) {
    w.n_words = a.words;
    w.n_bytes = a.bytes;
    w.flagged = a.bytes == 0;
    if (a.bytes > 0) {
      w.relative_pct = 100.0 * a.rel / static_cast<double>(a.bytes);
      w.raw_pct = 100.0 * a.raw / static_cast<double>(a.bytes);
    }
    if (a.focus_n > 0) w.focus = a.focus / static_cast<double>(a.focus_n);
  };
  finish(acc_osw, out.osw);
  finish(acc_non, out.non_osw);
  return out;
}

}  // namespace charmt
