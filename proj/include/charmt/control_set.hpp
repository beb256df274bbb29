#pragma once

// Synthetic copying control set: aligned source/reference word pairs that are
// both tagged as proper nouns are replaced by one random Latin-letter string,
// so copying it is the only correct translation.
//
// Random strings come from std::mt19937_64 (fully specified by the standard)
// seeded with the user's seed. Each letter is drawn from the 52 ASCII letters
// by rejection sampling on the raw 64-bit output, and the first letter is then
// uppercased. No std:: distribution is involved, so output is identical on
// every platform.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "charmt/corpus_io.hpp"
#include "charmt/error.hpp"
#include "charmt/text.hpp"

namespace charmt {

struct Replacement {
  std::string id;
  std::size_t src_index = 0;
  std::size_t ref_index = 0;
  std::string original_src;
  std::string original_ref;
  std::string replacement;

  friend bool operator==(const Replacement&, const Replacement&) = default;
};

struct ControlCorpus {
  Corpus corpus;
  std::vector<Replacement> replacements;
  std::uint64_t seed = 0;
};

inline const std::set<std::string, std::less<>>& default_proper_noun_tags() {
  static const std::set<std::string, std::less<>> tags{"NNP", "NNPS", "PROPN"};
  return tags;
}

/// Seeded generator of proper-noun-shaped random strings.
class RandomWordSource {
 public:
  explicit RandomWordSource(std::uint64_t seed) : engine_(seed) {}

  std::string next(std::size_t length) {
    static constexpr std::string_view kLetters =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
    std::string out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) out.push_back(kLetters[draw(kLetters.size())]);
    if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 32);
    return out;
  }

 private:
  std::size_t draw(std::size_t n) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  std::mt19937_64 engine_;
};

namespace control_detail {

inline const std::vector<std::string>& tags_for(const TagMap& tags, const std::string& id,
                                                std::size_t expected, const char* side) {
  auto it = tags.find(id);
  if (it == tags.end()) {
    throw ValidationError(std::string("no ") + side + " tags for record '" + id + "'");
  }
  if (it->second.size() != expected) {
    throw ValidationError(std::string(side) + " tags for record '" + id + "': " +
                          std::to_string(it->second.size()) + " tags for " +
                          std::to_string(expected) + " tokens");
  }
  return it->second;
}

/// Rebuilds `s` with the cores of selected tokens replaced; every other byte
/// is copied unchanged.
inline std::string splice(std::string_view s, const std::vector<text::TokenSpan>& spans,
                          const std::map<std::size_t, std::string>& replace) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& [idx, word] : replace) {
    const auto& t = spans[idx];
    out.append(s.substr(pos, t.core_begin - pos));
    out.append(word);
    pos = t.core_end;
  }
  out.append(s.substr(pos));
  return out;
}

}  // namespace control_detail

/// Builds the control corpus. Hypotheses are dropped from the output since
/// they no longer match the modified sources.
inline ControlCorpus generate_control(
    const Corpus& corpus, const AlignmentMap& src_ref, const TagMap& src_tags,
    const TagMap& ref_tags, std::uint64_t seed,
    const std::set<std::string, std::less<>>& proper_noun_tags = default_proper_noun_tags()) {
  ControlCorpus out;
  out.seed = seed;
  out.corpus.source_lang = corpus.source_lang;
  out.corpus.target_lang = corpus.target_lang;
  RandomWordSource rng(seed);

  for (const auto& rec : corpus.records) {
    const auto src_spans = text::token_spans(rec.source);
    const auto ref_spans = text::token_spans(rec.reference);
    const auto& st = control_detail::tags_for(src_tags, rec.id, src_spans.size(), "source");
    const auto& rt = control_detail::tags_for(ref_tags, rec.id, ref_spans.size(), "reference");
    auto al = src_ref.find(rec.id);
    if (al == src_ref.end()) {
      throw ValidationError("no source-reference alignment for record '" + rec.id + "'");
    }
    validate_alignment(al->second, src_spans.size(), ref_spans.size(), rec.id);

    auto core = [](std::string_view s, const text::TokenSpan& t) {
      return std::string(s.substr(t.core_begin, t.core_end - t.core_begin));
    };
    std::map<std::string, std::string> by_word;  // original source word -> replacement
    std::map<std::size_t, std::string> src_repl;
    std::map<std::size_t, std::string> ref_repl;
    for (const auto& l : al->second.links) {
      if (!proper_noun_tags.contains(st[l.src]) || !proper_noun_tags.contains(rt[l.tgt])) continue;
      const auto src_word = core(rec.source, src_spans[l.src]);
      const auto ref_word = core(rec.reference, ref_spans[l.tgt]);
      if (src_word.empty() || ref_word.empty()) continue;
      auto it = by_word.find(src_word);
      if (it == by_word.end()) {
        std::string fresh;
        bool clash = true;
        // Very short words in letter-rich sentences may have no clash-free
        // string; give up after a bounded number of draws.
        for (int attempt = 0; clash && attempt < 1000; ++attempt) {
          fresh = rng.next(text::length(src_word));
          clash = rec.source.find(fresh) != std::string::npos ||
                  rec.reference.find(fresh) != std::string::npos;
          for (const auto& [_, used] : by_word) clash = clash || used == fresh;
        }
        it = by_word.emplace(src_word, fresh).first;
      }
      // A reference token already claimed by a different source word keeps
      // its first replacement.
      if (auto r = ref_repl.find(l.tgt); r != ref_repl.end() && r->second != it->second) continue;
      src_repl[l.src] = it->second;
      ref_repl[l.tgt] = it->second;
      out.replacements.push_back({rec.id, l.src, l.tgt, src_word, ref_word, it->second});
    }
    SentenceRecord modified;
    modified.id = rec.id;
    modified.source = control_detail::splice(rec.source, src_spans, src_repl);
    modified.reference = control_detail::splice(rec.reference, ref_spans, ref_repl);
    out.corpus.records.push_back(std::move(modified));
  }
  return out;
}

/// Fraction of replacements whose string occurs verbatim in the system output
/// for that sentence.
inline double copying_accuracy(std::span<const Replacement> replacements,
                               const std::map<std::string, std::string, std::less<>>& hypotheses) {
  if (replacements.empty()) throw ValidationError("copying accuracy: no replacements to score");
  std::size_t hits = 0;
  for (const auto& r : replacements) {
    auto it = hypotheses.find(r.id);
    if (it == hypotheses.end()) {
      throw ValidationError("copying accuracy: no hypothesis for record '" + r.id + "'");
    }
    if (it->second.find(r.replacement) != std::string::npos) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(replacements.size());
}

/// Share of reference tokens tagged as proper nouns.
inline double proper_noun_rate(
    const Corpus& corpus, const TagMap& ref_tags,
    const std::set<std::string, std::less<>>& proper_noun_tags = default_proper_noun_tags()) {
  std::size_t total = 0;
  std::size_t proper = 0;
  for (const auto& rec : corpus.records) {
    const auto n = text::token_spans(rec.reference).size();
    const auto& tags = control_detail::tags_for(ref_tags, rec.id, n, "reference");
    total += n;
    for (const auto& t : tags) proper += proper_noun_tags.contains(t) ? 1 : 0;
  }
  if (total == 0) throw ValidationError("proper-noun rate: corpus has no reference tokens");
  return static_cast<double>(proper) / static_cast<double>(total);
}

inline std::string serialize_replacement(const Replacement& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["src_index"] = r.src_index;
  j["ref_index"] = r.ref_index;
  j["original_src"] = r.original_src;
  j["original_ref"] = r.original_ref;
  j["replacement"] = r.replacement;
  return j.dump();
}

/// One replacement per line, as written by `serialize_replacement`.
inline std::vector<Replacement> load_replacement_log(std::istream& in,
                                                     std::string_view name = "<log>") {
  std::vector<Replacement> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    io_detail::chomp(line);
    if (io_detail::blank(line)) continue;
    const auto at = io_detail::where(name, line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(at + ": malformed log entry: " + e.what());
    }
    if (!j.is_object()) throw ParseError(at + ": log entry must be a JSON object");
    Replacement r;
    try {
      r.id = j.at("id").get<std::string>();
      r.src_index = j.at("src_index").get<std::size_t>();
      r.ref_index = j.at("ref_index").get<std::size_t>();
      r.original_src = j.at("original_src").get<std::string>();
      r.original_ref = j.at("original_ref").get<std::string>();
      r.replacement = j.at("replacement").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(at + ": bad log entry: " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Replacement> load_replacement_log(const std::string& path) {
  auto in = io_detail::open_input(path);
  return load_replacement_log(in, path);
}

}  // namespace charmt
