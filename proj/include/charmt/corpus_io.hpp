#pragma once

// Readers and writers for the toolkit's input artifacts: parallel corpora,
// Pharaoh word alignments, byte-level attribution dumps, language metadata
// and chrF++ score tables.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "charmt/error.hpp"

namespace charmt {

struct SentenceRecord {
  std::string id;
  std::string source;
  std::string reference;
  std::map<std::string, std::string> hypotheses;  // system name -> text

  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

struct Corpus {
  std::vector<SentenceRecord> records;
  std::string source_lang;
  std::string target_lang;

  const SentenceRecord* find(std::string_view id) const {
    for (const auto& r : records) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }

  /// System names shared by every record (empty for an empty corpus).
  std::vector<std::string> systems() const {
    std::vector<std::string> out;
    if (records.empty()) return out;
    for (const auto& [name, _] : records.front().hypotheses) out.push_back(name);
    return out;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct Link {
  std::size_t src = 0;
  std::size_t tgt = 0;

  friend auto operator<=>(const Link&, const Link&) = default;
};

struct Alignment {
  std::set<Link> links;

  friend bool operator==(const Alignment&, const Alignment&) = default;
};

/// Alignments keyed by sentence id.
using AlignmentMap = std::map<std::string, Alignment, std::less<>>;

struct AttributionStep {
  std::vector<double> src_norms;
  std::vector<double> tgt_norms;
};

/// Gradient-norm attributions for one generated sentence. Step t produced
/// target_bytes[t] and carries one norm per source byte and one per
/// previously generated byte. The final target byte is the end-of-sentence
/// marker.
struct AttributionRecord {
  std::string id;
  std::vector<std::uint8_t> source_bytes;
  std::vector<std::uint8_t> target_bytes;
  std::vector<AttributionStep> steps;
  /// Number of leading source entries that belong to the instruction prompt
  /// rather than the sentence itself. Zero when the producer did not say.
  std::size_t prompt_len = 0;
};

struct LanguageInfo {
  std::string code;
  std::string script;
  std::string subgrouping;
  bool in_pretraining = false;
};

struct ScoreKey {
  std::string system;
  std::string code;
  std::string script;
  std::string condition;

  friend auto operator<=>(const ScoreKey&, const ScoreKey&) = default;
};

struct ScoreTable {
  std::map<ScoreKey, double> entries;

  std::optional<double> get(const ScoreKey& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return it->second;
  }
};

namespace io_detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

inline std::string where(std::string_view name, std::size_t line_no) {
  return std::string(name) + ":" + std::to_string(line_no);
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

inline void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

/// Splits one CSV line, honouring double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv(std::string_view s, const std::string& at) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError(at + ": unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

inline double parse_double(std::string_view s, const std::string& at) {
  std::string tmp(s);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    throw ParseError(at + ": not a number: '" + tmp + "'");
  }
  if (used != tmp.size() || !std::isfinite(v)) {
    throw ParseError(at + ": not a finite number: '" + tmp + "'");
  }
  return v;
}

inline std::size_t parse_index(std::string_view s) {
  std::size_t v = 0;
  if (s.empty()) throw ParseError("empty index");
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("bad index");
  return v;
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     const std::string& at) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(at + ": missing field \"" + key + "\"");
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  const std::string& at) {
  const auto& v = require(obj, key, at);
  if (!v.is_string()) throw ParseError(at + ": field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

/// Parses the line-delimited corpus format:
///   {"id": ..., "src": ..., "ref": ..., "hyp": {"byt5": ..., "mt5": ...}}
/// Blank lines are ignored. `name` is used in error messages.
inline Corpus parse_corpus(std::istream& in, std::string_view name = "<corpus>") {
  using io_detail::where;
  Corpus corpus;
  std::set<std::string, std::less<>> seen;
  std::optional<std::set<std::string>> systems;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    io_detail::chomp(line);
    if (io_detail::blank(line)) continue;
    const auto at = where(name, line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(at + ": malformed record: " + e.what());
    }
    if (!j.is_object()) throw ParseError(at + ": record must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (key != "id" && key != "src" && key != "ref" && key != "hyp") {
        throw ParseError(at + ": unknown field \"" + key + "\"");
      }
    }
    SentenceRecord rec;
    rec.id = io_detail::require_string(j, "id", at);
    rec.source = io_detail::require_string(j, "src", at);
    rec.reference = io_detail::require_string(j, "ref", at);
    if (auto it = j.find("hyp"); it != j.end()) {
      if (!it->is_object()) throw ParseError(at + ": field \"hyp\" must be an object");
      for (const auto& [sys, text] : it->items()) {
        if (!text.is_string()) {
          throw ParseError(at + ": hypothesis for \"" + sys + "\" must be a string");
        }
        rec.hypotheses.emplace(sys, text.get<std::string>());
      }
    }
    if (rec.id.empty()) throw ValidationError(at + ": empty id");
    if (rec.source.empty()) throw ValidationError(at + ": empty source for id '" + rec.id + "'");
    if (rec.reference.empty()) {
      throw ValidationError(at + ": empty reference for id '" + rec.id + "'");
    }
    if (!seen.insert(rec.id).second) {
      throw ValidationError(at + ": duplicate id '" + rec.id + "'");
    }
    std::set<std::string> these;
    for (const auto& [sys, _] : rec.hypotheses) these.insert(sys);
    if (!systems) {
      systems = these;
    } else if (*systems != these) {
      throw ValidationError(at + ": record '" + rec.id +
                            "' has a different set of hypothesis systems than earlier records");
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

inline Corpus parse_corpus(const std::string& path) {
  auto in = io_detail::open_input(path);
  return parse_corpus(in, path);
}

inline std::string serialize_record(const SentenceRecord& rec) {
  nlohmann::ordered_json j;
  j["id"] = rec.id;
  j["src"] = rec.source;
  j["ref"] = rec.reference;
  nlohmann::ordered_json hyp = nlohmann::ordered_json::object();
  for (const auto& [sys, text] : rec.hypotheses) hyp[sys] = text;
  j["hyp"] = hyp;
  return j.dump();
}

inline std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& rec : corpus.records) {
    out += serialize_record(rec);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alignments
// ---------------------------------------------------------------------------

/// Parses whitespace-separated Pharaoh "i-j" pairs. Duplicate links collapse.
inline Alignment parse_alignment_line(std::string_view text) {
  Alignment a;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
    const auto tok = text.substr(i, j - i);
    const auto dash = tok.find('-');
    try {
      if (dash == std::string_view::npos) throw ParseError("no dash");
      a.links.insert({io_detail::parse_index(tok.substr(0, dash)),
                      io_detail::parse_index(tok.substr(dash + 1))});
    } catch (const ParseError&) {
      throw ParseError("malformed alignment token '" + std::string(tok) + "'");
    }
    i = j;
  }
  return a;
}

/// Reads `id<TAB>i-j i-j ...` lines.
inline AlignmentMap parse_alignment_file(std::istream& in,
                                         std::string_view name = "<alignments>") {
  AlignmentMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    io_detail::chomp(line);
    if (io_detail::blank(line)) continue;
    const auto at = io_detail::where(name, line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(at + ": expected id<TAB>links");
    std::string id = line.substr(0, tab);
    if (id.empty()) throw ParseError(at + ": empty id");
    Alignment a;
    try {
      a = parse_alignment_line(std::string_view(line).substr(tab + 1));
    } catch (const ParseError& e) {
      throw ParseError(at + ": " + e.what());
    }
    if (!out.emplace(id, std::move(a)).second) {
      throw ValidationError(at + ": duplicate id '" + id + "'");
    }
  }
  return out;
}

inline AlignmentMap parse_alignment_file(const std::string& path) {
  auto in = io_detail::open_input(path);
  return parse_alignment_file(in, path);
}

/// Checks every link against the given sentence lengths (in whitespace
/// tokens).
inline void validate_alignment(const Alignment& a, std::size_t src_len, std::size_t tgt_len,
                               std::string_view id) {
  for (const auto& l : a.links) {
    if (l.src >= src_len || l.tgt >= tgt_len) {
      throw ValidationError("alignment link " + std::to_string(l.src) + "-" +
                            std::to_string(l.tgt) + " out of range for record '" +
                            std::string(id) + "' (" + std::to_string(src_len) + " source, " +
                            std::to_string(tgt_len) + " target words)");
    }
  }
}

// ---------------------------------------------------------------------------
// Attributions
// ---------------------------------------------------------------------------

/// Enforces the AttributionRecord invariants; throws ValidationError.
inline void validate_attribution(const AttributionRecord& r) {
  const std::string who = "attribution record '" + r.id + "'";
  if (r.id.empty()) throw ValidationError("attribution record with empty id");
  if (r.steps.size() != r.target_bytes.size()) {
    throw ValidationError(who + ": " + std::to_string(r.steps.size()) + " steps for " +
                          std::to_string(r.target_bytes.size()) + " target bytes");
  }
  if (r.prompt_len > r.source_bytes.size()) {
    throw ValidationError(who + ": prompt_len exceeds source length");
  }
  for (std::size_t t = 0; t < r.steps.size(); ++t) {
    const auto& s = r.steps[t];
    const std::string step = who + " step " + std::to_string(t);
    if (s.src_norms.size() != r.source_bytes.size()) {
      throw ValidationError(step + ": " + std::to_string(s.src_norms.size()) +
                            " source norms for " + std::to_string(r.source_bytes.size()) +
                            " source bytes");
    }
    if (s.tgt_norms.size() != t) {
      throw ValidationError(step + ": expected " + std::to_string(t) + " target norms, got " +
                            std::to_string(s.tgt_norms.size()));
    }
    bool positive = false;
    for (const auto* v : {&s.src_norms, &s.tgt_norms}) {
      for (double x : *v) {
        if (!std::isfinite(x)) throw ValidationError(step + ": non-finite norm");
        if (x < 0) throw ValidationError(step + ": negative norm " + std::to_string(x));
        if (x > 0) positive = true;
      }
    }
    if (!positive) throw ValidationError(step + ": all norms are zero");
  }
}

namespace io_detail {

inline std::vector<std::uint8_t> parse_bytes(const nlohmann::json& j, const char* key,
                                             const std::string& at) {
  const auto& arr = require(j, key, at);
  if (!arr.is_array()) throw ParseError(at + ": \"" + key + "\" must be an array");
  std::vector<std::uint8_t> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number_integer()) throw ParseError(at + ": \"" + key + "\" holds a non-integer");
    const auto x = v.get<std::int64_t>();
    if (x < 0 || x > 255) {
      throw ValidationError(at + ": byte value " + std::to_string(x) + " outside 0-255");
    }
    out.push_back(static_cast<std::uint8_t>(x));
  }
  return out;
}

inline std::vector<double> parse_norms(const nlohmann::json& j, const char* key,
                                       const std::string& at) {
  const auto& arr = require(j, key, at);
  if (!arr.is_array()) throw ParseError(at + ": \"" + key + "\" must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw ParseError(at + ": \"" + key + "\" holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace io_detail

inline AttributionRecord parse_attribution_line(std::string_view line, const std::string& at) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(at + ": malformed record: " + e.what());
  }
  if (!j.is_object()) throw ParseError(at + ": record must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "id" && key != "source_bytes" && key != "target_bytes" && key != "steps" &&
        key != "prompt_len") {
      throw ParseError(at + ": unknown field \"" + key + "\"");
    }
  }
  AttributionRecord r;
  r.id = io_detail::require_string(j, "id", at);
  r.source_bytes = io_detail::parse_bytes(j, "source_bytes", at);
  r.target_bytes = io_detail::parse_bytes(j, "target_bytes", at);
  if (auto it = j.find("prompt_len"); it != j.end()) {
    if (!it->is_number_unsigned()) {
      throw ParseError(at + ": \"prompt_len\" must be a nonnegative integer");
    }
    r.prompt_len = it->get<std::size_t>();
  }
  const auto& steps = io_detail::require(j, "steps", at);
  if (!steps.is_array()) throw ParseError(at + ": \"steps\" must be an array");
  for (const auto& s : steps) {
    if (!s.is_object()) throw ParseError(at + ": each step must be an object");
    for (const auto& [key, _] : s.items()) {
      if (key != "src" && key != "tgt") {
        throw ParseError(at + ": unknown step field \"" + key + "\"");
      }
    }
    AttributionStep step;
    step.src_norms = io_detail::parse_norms(s, "src", at);
    step.tgt_norms = io_detail::parse_norms(s, "tgt", at);
    r.steps.push_back(std::move(step));
  }
  try {
    validate_attribution(r);
  } catch (const ValidationError& e) {
    throw ValidationError(at + ": " + e.what());
  }
  return r;
}

inline std::vector<AttributionRecord> load_attributions(std::istream& in,
                                                        std::string_view name = "<attributions>") {
  std::vector<AttributionRecord> out;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    io_detail::chomp(line);
    if (io_detail::blank(line)) continue;
    const auto at = io_detail::where(name, line_no);
    auto rec = parse_attribution_line(line, at);
    if (!seen.insert(rec.id).second) throw ValidationError(at + ": duplicate id '" + rec.id + "'");
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<AttributionRecord> load_attributions(const std::string& path) {
  auto in = io_detail::open_input(path);
  return load_attributions(in, path);
}

inline std::string serialize_attribution(const AttributionRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["source_bytes"] = r.source_bytes;
  j["target_bytes"] = r.target_bytes;
  if (r.prompt_len > 0) j["prompt_len"] = r.prompt_len;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : r.steps) {
    nlohmann::ordered_json o;
    o["src"] = s.src_norms;
    o["tgt"] = s.tgt_norms;
    steps.push_back(std::move(o));
  }
  j["steps"] = std::move(steps);
  return j.dump();
}

// ---------------------------------------------------------------------------
// Language metadata and score tables
// ---------------------------------------------------------------------------

/// TSV with header: code, script, subgrouping, in_pretraining (0/1).
inline std::vector<LanguageInfo> load_language_metadata(std::istream& in,
                                                        std::string_view name = "<metadata>") {
  std::vector<LanguageInfo> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    io_detail::chomp(line);
    if (io_detail::blank(line)) continue;
    const auto at = io_detail::where(name, line_no);
    auto cols = io_detail::split(line, '\t');
    if (cols.size() != 4) {
      throw ParseError(at + ": expected 4 tab-separated columns, got " +
                       std::to_string(cols.size()));
    }
    if (header) {
      header = false;
      continue;
    }
    LanguageInfo info;
    info.code = cols[0];
    info.script = cols[1];
    info.subgrouping = cols[2];
    if (cols[3] == "1") {
      info.in_pretraining = true;
    } else if (cols[3] == "0") {
      info.in_pretraining = false;
    } else {
      throw ParseError(at + ": in_pretraining must be 0 or 1, got '" + cols[3] + "'");
    }
    if (info.code.empty() || info.script.empty()) throw ValidationError(at + ": empty code or script");
    if (!seen.emplace(info.code, info.script).second) {
      throw ValidationError(at + ": duplicate language (" + info.code + ", " + info.script + ")");
    }
    out.push_back(std::move(info));
  }
  return out;
}

inline std::vector<LanguageInfo> load_language_metadata(const std::string& path) {
  auto in = io_detail::open_input(path);
  return load_language_metadata(in, path);
}

/// CSV with header: system, code, script, condition, chrfpp.
inline ScoreTable load_score_table(std::istream& in, std::string_view name = "<scores>") {
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    io_detail::chomp(line);
    if (io_detail::blank(line)) continue;
    const auto at = io_detail::where(name, line_no);
    auto cols = io_detail::split_csv(line, at);
    if (cols.size() != 5) {
      throw ParseError(at + ": expected 5 comma-separated columns, got " +
                       std::to_string(cols.size()));
    }
    if (header) {
      header = false;
      continue;
    }
    ScoreKey key{cols[0], cols[1], cols[2], cols[3]};
    const double v = io_detail::parse_double(cols[4], at);
    if (v < 0.0 || v > 100.0) {
      throw ValidationError(at + ": score " + cols[4] + " outside [0,100]");
    }
    if (!table.entries.emplace(key, v).second) {
      throw ValidationError(at + ": duplicate entry (" + key.system + ", " + key.code + ", " +
                            key.script + ", " + key.condition + ")");
    }
  }
  return table;
}

inline ScoreTable load_score_table(const std::string& path) {
  auto in = io_detail::open_input(path);
  return load_score_table(in, path);
}

/// Per-sentence tag sequences keyed by id.
using TagMap = std::map<std::string, std::vector<std::string>, std::less<>>;

/// `id<TAB>tag tag ...` lines, as produced for source or reference POS tags.
inline TagMap load_tag_file(std::istream& in, std::string_view name = "<tags>") {
  TagMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    io_detail::chomp(line);
    if (io_detail::blank(line)) continue;
    const auto at = io_detail::where(name, line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(at + ": expected id<TAB>tags");
    std::string id = line.substr(0, tab);
    std::vector<std::string> tags;
    std::istringstream ss(line.substr(tab + 1));
    for (std::string t; ss >> t;) tags.push_back(t);
    if (!out.emplace(id, std::move(tags)).second) {
      throw ValidationError(at + ": duplicate id '" + id + "'");
    }
  }
  return out;
}

inline TagMap load_tag_file(const std::string& path) {
  auto in = io_detail::open_input(path);
  return load_tag_file(in, path);
}

}  // namespace charmt
