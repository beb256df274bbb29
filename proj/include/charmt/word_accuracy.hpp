#pragma once

// Alignment-based word translation accuracy. A reference word counts as
// correctly translated when some hypothesis word aligned to the same source
// word equals it after case folding. Words are whitespace tokens with edge
// punctuation stripped; indices follow the aligner's whitespace tokens.

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "charmt/corpus_io.hpp"
#include "charmt/error.hpp"
#include "charmt/levenshtein.hpp"
#include "charmt/parallel.hpp"
#include "charmt/text.hpp"

namespace charmt {

struct WordPair {
  std::string src_word;
  std::string ref_word;
  std::size_t src_index = 0;
  std::size_t ref_index = 0;
  double similarity = 0;  // orthographic similarity of the case-folded words
};

/// One WordPair per source-reference link, in link order. Links touching a
/// punctuation-only token are skipped since there is no word to compare.
inline std::vector<WordPair> extract_word_pairs(const SentenceRecord& record,
                                                const Alignment& src_ref) {
  const auto src = text::word_tokens(record.source);
  const auto ref = text::word_tokens(record.reference);
  validate_alignment(src_ref, src.size(), ref.size(), record.id);
  std::vector<WordPair> pairs;
  pairs.reserve(src_ref.links.size());
  for (const auto& l : src_ref.links) {
    const auto& s = src[l.src];
    const auto& r = ref[l.tgt];
    if (s.empty() || r.empty()) continue;
    pairs.push_back({s, r, l.src, l.tgt,
                     orthographic_similarity(text::fold_case(s), text::fold_case(r))});
  }
  return pairs;
}

/// True iff a hypothesis word aligned to pair.src_index matches pair.ref_word
/// under case folding.
inline bool word_correct(const WordPair& pair, std::string_view hypothesis,
                         const Alignment& src_hyp) {
  const auto hyp = text::word_tokens(hypothesis);
  const auto want = text::fold_case(pair.ref_word);
  for (const auto& l : src_hyp.links) {
    if (l.src != pair.src_index) continue;
    if (l.tgt >= hyp.size()) {
      throw ValidationError("hypothesis alignment index " + std::to_string(l.tgt) +
                            " out of range (" + std::to_string(hyp.size()) + " words)");
    }
    if (!hyp[l.tgt].empty() && text::fold_case(hyp[l.tgt]) == want) return true;
  }
  return false;
}

struct SystemPair {
  std::string first;
  std::string second;
};

/// A word pair together with whether each system got it right.
struct PairOutcome {
  std::string id;
  WordPair pair;
  bool correct_first = false;
  bool correct_second = false;
};

namespace word_detail {

inline const Alignment& lookup(const AlignmentMap& m, const std::string& id, const char* what) {
  auto it = m.find(id);
  if (it == m.end()) {
    throw ValidationError(std::string("no ") + what + " alignment for record '" + id + "'");
  }
  return it->second;
}

inline const std::string& hypothesis(const SentenceRecord& r, const std::string& system) {
  auto it = r.hypotheses.find(system);
  if (it == r.hypotheses.end()) {
    throw ValidationError("record '" + r.id + "' has no hypothesis for system '" + system + "'");
  }
  return it->second;
}

}  // namespace word_detail

/// Evaluates every aligned word pair of the corpus for both systems. Records
/// are processed in parallel; the result is in corpus order.
inline std::vector<PairOutcome> evaluate_word_pairs(const Corpus& corpus,
                                                    const AlignmentMap& src_ref,
                                                    const AlignmentMap& src_hyp_first,
                                                    const AlignmentMap& src_hyp_second,
                                                    const SystemPair& systems,
                                                    unsigned threads = 1) {
  std::vector<std::vector<PairOutcome>> per_record(corpus.records.size());
  parallel_for(corpus.records.size(), threads, [&](std::size_t i) {
    const auto& rec = corpus.records[i];
    const auto& hyp_a = word_detail::hypothesis(rec, systems.first);
    const auto& hyp_b = word_detail::hypothesis(rec, systems.second);
    const auto& al_a = word_detail::lookup(src_hyp_first, rec.id, "source-hypothesis");
    const auto& al_b = word_detail::lookup(src_hyp_second, rec.id, "source-hypothesis");
    const auto n_src = text::word_tokens(rec.source).size();
    validate_alignment(al_a, n_src, text::word_tokens(hyp_a).size(), rec.id);
    validate_alignment(al_b, n_src, text::word_tokens(hyp_b).size(), rec.id);
    for (auto& p : extract_word_pairs(rec, word_detail::lookup(src_ref, rec.id, "source-reference"))) {
      PairOutcome o;
      o.id = rec.id;
      o.correct_first = word_correct(p, hyp_a, al_a);
      o.correct_second = word_correct(p, hyp_b, al_b);
      o.pair = std::move(p);
      per_record[i].push_back(std::move(o));
    }
  });
  std::vector<PairOutcome> out;
  for (auto& v : per_record) {
    for (auto& o : v) out.push_back(std::move(o));
  }
  return out;
}

struct AccuracyBin {
  std::string label;
  double lower = 0;
  double upper = std::numeric_limits<double>::infinity();
  std::size_t n_pairs = 0;
  std::size_t correct_first = 0;
  std::size_t correct_second = 0;
  double accuracy_first = std::numeric_limits<double>::quiet_NaN();
  double accuracy_second = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();  // first - second
  bool flagged = true;                                       // no pairs in the bin

  void add(const PairOutcome& o) {
    ++n_pairs;
    correct_first += o.correct_first ? 1 : 0;
    correct_second += o.correct_second ? 1 : 0;
  }

  void finish() {
    flagged = n_pairs == 0;
    if (flagged) return;
    accuracy_first = static_cast<double>(correct_first) / static_cast<double>(n_pairs);
    accuracy_second = static_cast<double>(correct_second) / static_cast<double>(n_pairs);
    delta = accuracy_first - accuracy_second;
  }
};

struct BinnedAccuracy {
  std::vector<AccuracyBin> bins;
  std::size_t total_pairs = 0;
};

/// Accuracy over all pairs, no binning.
inline AccuracyBin overall_accuracy(std::span<const PairOutcome> outcomes) {
  AccuracyBin bin;
  bin.label = "all";
  for (const auto& o : outcomes) bin.add(o);
  bin.finish();
  return bin;
}

namespace word_detail {

inline std::string fmt_threshold(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

inline void check_ascending(std::span<const double> xs, const char* what) {
  if (xs.empty()) throw ValidationError(std::string(what) + ": need at least one value");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) throw ValidationError(std::string(what) + ": non-finite value");
    if (i > 0 && !(xs[i] > xs[i - 1])) {
      throw ValidationError(std::string(what) + ": values must be strictly ascending");
    }
  }
}

}  // namespace word_detail

/// The two readings of a similarity axis: pairs with similarity >= tau
/// (cumulative) and pairs in [tau_i, tau_{i+1}) with the last bin closed
/// above (disjoint).
struct SimilarityAccuracy {
  BinnedAccuracy cumulative;
  BinnedAccuracy disjoint;
};

inline SimilarityAccuracy accuracy_by_similarity(std::span<const PairOutcome> outcomes,
                                                 std::span<const double> thresholds) {
  word_detail::check_ascending(thresholds, "similarity thresholds");
  if (thresholds.front() < 0.0 || thresholds.back() > 1.0) {
    throw ValidationError("similarity thresholds must lie in [0, 1]");
  }
  SimilarityAccuracy out;
  out.cumulative.total_pairs = out.disjoint.total_pairs = outcomes.size();
  const std::size_t k = thresholds.size();
  out.cumulative.bins.resize(k);
  out.disjoint.bins.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto& c = out.cumulative.bins[i];
    c.lower = thresholds[i];
    c.upper = 1.0;
    c.label = ">=" + word_detail::fmt_threshold(thresholds[i]);
    auto& d = out.disjoint.bins[i];
    d.lower = thresholds[i];
    d.upper = i + 1 < k ? thresholds[i + 1] : 1.0;
    d.label = "[" + word_detail::fmt_threshold(d.lower) + "," + word_detail::fmt_threshold(d.upper) +
              (i + 1 < k ? ")" : "]");
  }
  for (const auto& o : outcomes) {
    const double s = o.pair.similarity;
    for (std::size_t i = 0; i < k; ++i) {
      if (s >= thresholds[i]) out.cumulative.bins[i].add(o);
    }
    // Disjoint: the last threshold not above s.
    for (std::size_t i = k; i-- > 0;) {
      if (s >= thresholds[i]) {
        out.disjoint.bins[i].add(o);
        break;
      }
    }
  }
  for (auto& b : out.cumulative.bins) b.finish();
  for (auto& b : out.disjoint.bins) b.finish();
  return out;
}

/// Default similarity thresholds 0, 0.1, ..., 1.0.
inline std::vector<double> default_similarity_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 10; ++i) t.push_back(i / 10.0);
  return t;
}

struct FrequencyTable {
  std::map<std::string, long long, std::less<>> counts;

  long long count(std::string_view folded_word) const {
    auto it = counts.find(folded_word);
    return it == counts.end() ? 0 : it->second;
  }
};

/// Counts case-folded word tokens (edge punctuation stripped, punctuation-only
/// tokens dropped) over the training-side text.
inline FrequencyTable build_frequency_table(std::span<const std::string> lines) {
  FrequencyTable table;
  for (const auto& line : lines) {
    for (const auto& w : text::word_tokens(line)) {
      if (!w.empty()) ++table.counts[text::fold_case(w)];
    }
  }
  return table;
}

/// Buckets pairs by the training frequency of the reference word. Bins are
/// [b_i, b_{i+1}) with the last one open above; the first boundary must be 0
/// so the bins partition every pair.
inline BinnedAccuracy accuracy_by_frequency(std::span<const PairOutcome> outcomes,
                                            const FrequencyTable& freq,
                                            std::span<const double> boundaries) {
  word_detail::check_ascending(boundaries, "frequency bins");
  if (boundaries.front() != 0.0) throw ValidationError("frequency bins must start at 0");
  BinnedAccuracy out;
  out.total_pairs = outcomes.size();
  const std::size_t k = boundaries.size();
  out.bins.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto& b = out.bins[i];
    b.lower = boundaries[i];
    b.upper = i + 1 < k ? boundaries[i + 1] : std::numeric_limits<double>::infinity();
    b.label = "[" + word_detail::fmt_threshold(b.lower) + "," +
              (i + 1 < k ? word_detail::fmt_threshold(b.upper) : std::string("inf")) + ")";
  }
  for (const auto& o : outcomes) {
    const auto c = static_cast<double>(freq.count(text::fold_case(o.pair.ref_word)));
    for (std::size_t i = k; i-- > 0;) {
      if (c >= boundaries[i]) {
        out.bins[i].add(o);
        break;
      }
    }
  }
  for (auto& b : out.bins) b.finish();
  return out;
}

/// Default log-decade bins {0}, [1,10), [10,100), [100,1000), [1000,inf).
inline std::vector<double> default_frequency_bins() { return {0, 1, 10, 100, 1000}; }

}  // namespace charmt
