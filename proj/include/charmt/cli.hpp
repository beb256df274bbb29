#pragma once

// `charmt` command-line front end. Each subcommand reads its inputs, runs one
// analysis and writes CSV (or JSON with --json) plus a run manifest.
//
// Exit codes: 0 success, 1 parse/validation error, 2 I/O error, 3 internal
// invariant violation.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "charmt/attribution.hpp"
#include "charmt/control_set.hpp"
#include "charmt/corpus_io.hpp"
#include "charmt/error.hpp"
#include "charmt/metrics.hpp"
#include "charmt/report.hpp"
#include "charmt/version.hpp"
#include "charmt/word_accuracy.hpp"
#include "charmt/zeroshot.hpp"

namespace charmt::cli {

namespace fs = std::filesystem;
using report::Cell;
using report::Table;

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw InvariantError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline std::vector<std::string> split_list(const std::string& s) {
  auto parts = io_detail::split(s, ',');
  for (const auto& p : parts) {
    if (p.empty()) throw ParseError("empty item in list '" + s + "'");
  }
  return parts;
}

inline std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split_list(s)) out.push_back(io_detail::parse_double(p, "list '" + s + "'"));
  return out;
}

inline std::pair<std::string, std::string> parse_system_pair(const std::string& s) {
  auto parts = split_list(s);
  if (parts.size() != 2) throw ParseError("--systems expects two names, got '" + s + "'");
  if (parts[0] == parts[1]) throw ParseError("--systems names must differ");
  return {parts[0], parts[1]};
}

/// Records what a run read, which parameters it used and what it wrote.
class RunContext {
 public:
  RunContext(std::string subcommand, std::ostream& out)
      : subcommand_(std::move(subcommand)), out_(out) {}

  bool json = false;
  unsigned threads = 1;
  std::string manifest_path;

  void input(const std::string& path) {
    inputs_.push_back({{"path", path}, {"sha256", sha256_hex(read_file(path))}});
  }

  template <typename T>
  void param(const std::string& key, const T& value) {
    params_[key] = value;
  }

  void summary(const std::string& key, nlohmann::ordered_json value) {
    summary_[key] = std::move(value);
  }

  /// Writes `content` to `path`, or to the output stream when path is empty.
  void write(const std::string& path, const std::string& content) {
    if (path.empty()) {
      out_ << content;
      return;
    }
    report::write_atomic(path, content);
    outputs_.push_back({{"path", path}, {"sha256", sha256_hex(content)}});
    if (primary_output_.empty()) primary_output_ = path;
  }

  void emit(const std::string& path, const Table& table,
            const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) {
    if (!json) {
      write(path, report::to_csv(table));
      return;
    }
    nlohmann::ordered_json doc;
    doc["subcommand"] = subcommand_;
    for (const auto& [k, v] : extra.items()) doc[k] = v;
    doc["rows"] = report::to_json_rows(table);
    write(path, doc.dump(2) + "\n");
  }

  void write_manifest() {
    nlohmann::ordered_json m;
    m["subcommand"] = subcommand_;
    m["toolkit_version"] = std::string(kVersion);
    m["format_version"] = kFormatVersion;
    m["inputs"] = inputs_;
    nlohmann::ordered_json params = params_;
    params["threads"] = threads;
    params["json"] = json;
    m["parameters"] = params;
    m["summary"] = summary_;
    m["outputs"] = outputs_;
    m["timestamp"] = timestamp();
    std::string path = manifest_path;
    if (path.empty()) {
      path = primary_output_.empty() ? "charmt-" + subcommand_ + ".manifest.json"
                                     : primary_output_ + ".manifest.json";
    }
    report::write_atomic(path, m.dump(2) + "\n");
  }

 private:
  static std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::string subcommand_;
  std::ostream& out_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json params_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json summary_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json outputs_ = nlohmann::ordered_json::array();
  std::string primary_output_;
};

// ---------------------------------------------------------------------------
// Subcommand handlers
// ---------------------------------------------------------------------------

struct ScoreArgs {
  std::string corpus, system, metric = "chrfpp", per_sentence, out;
};

inline std::vector<double> sentence_scores(const Corpus& corpus, const std::string& system,
                                           const std::string& metric, unsigned threads,
                                           double* corpus_score = nullptr) {
  std::vector<std::string> hyps, refs;
  for (const auto& r : corpus.records) {
    auto it = r.hypotheses.find(system);
    if (it == r.hypotheses.end()) {
      throw ValidationError("record '" + r.id + "' has no hypothesis for system '" + system + "'");
    }
    hyps.push_back(it->second);
    refs.push_back(r.reference);
  }
  MetricScore s;
  if (metric == "chrfpp") {
    s = chrf_pp(hyps, refs, ChrfParams{}, true, threads);
  } else if (metric == "chrf") {
    s = chrf_pp(hyps, refs, ChrfParams{6, 0, 2.0}, true, threads);
  } else if (metric == "bleu") {
    s = bleu(hyps, refs, true, threads);
  } else {
    throw ParseError("unknown metric '" + metric + "'");
  }
  if (corpus_score) *corpus_score = s.value;
  return *s.per_sentence;
}

inline void run_score(const ScoreArgs& a, RunContext& ctx) {
  ctx.input(a.corpus);
  ctx.param("system", a.system);
  ctx.param("metric", a.metric);
  const auto corpus = parse_corpus(a.corpus);
  if (corpus.records.empty()) throw ValidationError("corpus '" + a.corpus + "' is empty");
  double value = 0;
  const auto per = sentence_scores(corpus, a.system, a.metric, ctx.threads, &value);
  Table t{{"system", "metric", "n_sentences", "score"}, {}};
  t.add({a.system, a.metric, static_cast<long long>(corpus.records.size()), value});
  ctx.emit(a.out, t);
  if (!a.per_sentence.empty()) {
    Table ps{{"id", "score"}, {}};
    for (std::size_t i = 0; i < per.size(); ++i) ps.add({corpus.records[i].id, per[i]});
    ctx.emit(a.per_sentence, ps);
  }
}

struct CompareArgs {
  std::string corpus, systems, metric = "chrfpp", out;
};

inline void run_compare(const CompareArgs& a, RunContext& ctx) {
  ctx.input(a.corpus);
  ctx.param("systems", a.systems);
  ctx.param("metric", a.metric);
  const auto [first, second] = parse_system_pair(a.systems);
  const auto corpus = parse_corpus(a.corpus);
  const auto sa = sentence_scores(corpus, first, a.metric, ctx.threads);
  const auto sb = sentence_scores(corpus, second, a.metric, ctx.threads);
  const auto r = paired_t_test(sa, sb);
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  Table t{{"t", "p", "n", "mean_a", "mean_b", "significant"}, {}};
  t.add({r.t, r.p, static_cast<long long>(r.n), mean(sa), mean(sb),
         std::string(r.p < 0.05 ? "*" : "")});
  ctx.emit(a.out, t, {{"system_a", first}, {"system_b", second}, {"alpha", 0.05}});
}

struct OswArgs {
  std::string corpus, align_src_ref, align_hyp_a, align_hyp_b, systems, out;
  std::string thresholds;
  std::string train_target, bins;  // freq only
};

inline std::vector<PairOutcome> load_outcomes(const OswArgs& a, RunContext& ctx,
                                              std::pair<std::string, std::string>& systems) {
  for (const auto* p : {&a.corpus, &a.align_src_ref, &a.align_hyp_a, &a.align_hyp_b}) {
    ctx.input(*p);
  }
  ctx.param("systems", a.systems);
  systems = parse_system_pair(a.systems);
  const auto corpus = parse_corpus(a.corpus);
  const auto sr = parse_alignment_file(a.align_src_ref);
  const auto ha = parse_alignment_file(a.align_hyp_a);
  const auto hb = parse_alignment_file(a.align_hyp_b);
  return evaluate_word_pairs(corpus, sr, ha, hb, {systems.first, systems.second}, ctx.threads);
}

inline Table accuracy_table(const std::pair<std::string, std::string>& systems) {
  return Table{{"framing", "bin", "lower", "upper", "n_pairs", "acc_" + systems.first,
                "acc_" + systems.second, "delta", "flag"},
               {}};
}

inline void add_bins(Table& t, const std::string& framing, const BinnedAccuracy& b) {
  for (const auto& bin : b.bins) {
    t.add({framing, bin.label, bin.lower, bin.upper, static_cast<long long>(bin.n_pairs),
           bin.accuracy_first, bin.accuracy_second, bin.delta,
           std::string(bin.flagged ? "empty" : "")});
  }
}

inline void run_osw(const OswArgs& a, RunContext& ctx) {
  std::pair<std::string, std::string> systems;
  const auto outcomes = load_outcomes(a, ctx, systems);
  const auto thresholds =
      a.thresholds.empty() ? default_similarity_thresholds() : parse_reals(a.thresholds);
  ctx.param("thresholds", thresholds);
  const auto acc = accuracy_by_similarity(outcomes, thresholds);
  Table t = accuracy_table(systems);
  add_bins(t, "cumulative", acc.cumulative);
  add_bins(t, "disjoint", acc.disjoint);
  ctx.summary("total_pairs", outcomes.size());
  ctx.emit(a.out, t);
}

inline void run_freq(const OswArgs& a, RunContext& ctx) {
  std::pair<std::string, std::string> systems;
  const auto outcomes = load_outcomes(a, ctx, systems);
  ctx.input(a.train_target);
  const auto bins = a.bins.empty() ? default_frequency_bins() : parse_reals(a.bins);
  ctx.param("bins", bins);
  const auto freq = build_frequency_table(read_lines(a.train_target));
  const auto acc = accuracy_by_frequency(outcomes, freq, bins);
  Table t = accuracy_table(systems);
  add_bins(t, "frequency", acc);
  ctx.summary("total_pairs", outcomes.size());
  ctx.summary("vocabulary", freq.counts.size());
  ctx.emit(a.out, t);
}

struct AttrArgs {
  std::string attributions, corpus, align_src_ref, out;
  std::size_t window = 10;
  std::size_t max_pos = 10;
  double osw_min = 0.7;
  double nonosw_max = 0.3;
  bool drop_eos = false;
  bool drop_prompt = false;
};

inline AttributionOptions attr_options(const AttrArgs& a, RunContext& ctx) {
  ctx.param("drop_eos", a.drop_eos);
  ctx.param("drop_prompt", a.drop_prompt);
  return {a.drop_eos, a.drop_prompt};
}

inline void run_attr_curves(const AttrArgs& a, RunContext& ctx) {
  ctx.input(a.attributions);
  ctx.param("window", a.window);
  ctx.param("smoothing", "trailing");
  const auto opts = attr_options(a, ctx);
  const auto records = load_attributions(a.attributions);
  const auto curve = sentence_position_curve(records, a.window, opts, ctx.threads);
  Table t{{"position", "raw", "smoothed", "support"}, {}};
  for (std::size_t i = 0; i < curve.raw.size(); ++i) {
    t.add({static_cast<long long>(i), curve.raw[i], curve.smoothed[i],
           static_cast<long long>(curve.support[i])});
  }
  ctx.emit(a.out, t, {{"smoothing", "trailing"}, {"window", a.window}});
}

inline void run_attr_words(const AttrArgs& a, RunContext& ctx) {
  ctx.input(a.attributions);
  ctx.param("max_pos", a.max_pos);
  const auto opts = attr_options(a, ctx);
  const auto records = load_attributions(a.attributions);
  const auto curve = sentence_position_curve(records, 1, opts, ctx.threads);
  const auto points = in_word_relative_importance(records, curve, a.max_pos, opts, ctx.threads);
  Table t{{"in_word_position", "relative_pct", "count"}, {}};
  for (const auto& p : points) {
    t.add({static_cast<long long>(p.position), p.relative_pct, static_cast<long long>(p.count)});
  }
  ctx.emit(a.out, t);
}

inline void run_attr_osw(const AttrArgs& a, RunContext& ctx) {
  ctx.input(a.attributions);
  ctx.input(a.corpus);
  ctx.input(a.align_src_ref);
  ctx.param("osw_min", a.osw_min);
  ctx.param("nonosw_max", a.nonosw_max);
  const auto opts = attr_options(a, ctx);
  const auto records = load_attributions(a.attributions);
  const auto corpus = parse_corpus(a.corpus);
  const auto align = parse_alignment_file(a.align_src_ref);
  const auto r = osw_source_importance(records, corpus, align, {a.osw_min, a.nonosw_max}, opts,
                                       ctx.threads);
  Table t{{"class", "n_words", "n_bytes", "relative_pct", "raw_pct", "focus", "flag"}, {}};
  auto row = [&](const char* name, const WordClassImportance& w) {
    t.add({std::string(name), static_cast<long long>(w.n_words), static_cast<long long>(w.n_bytes),
           w.relative_pct, w.raw_pct, w.focus, std::string(w.flagged ? "empty" : "")});
  };
  row("osw", r.osw);
  row("non_osw", r.non_osw);
  ctx.summary("unmatched_pairs", r.unmatched);
  ctx.emit(a.out, t, {{"unmatched_pairs", r.unmatched}});
}

struct ZeroshotArgs {
  std::string scores, metadata, rule = "full", systems, condition, out;
};

inline void run_zeroshot_predict(const ZeroshotArgs& a, RunContext& ctx) {
  ctx.input(a.scores);
  ctx.input(a.metadata);
  ctx.param("rule", a.rule);
  ctx.param("systems", a.systems);
  PredictorRule rule;
  if (a.rule == "full") {
    rule = PredictorRule::SubgroupAndScript;
  } else if (a.rule == "presence") {
    rule = PredictorRule::PresenceOnly;
  } else {
    throw ParseError("--rule must be 'full' or 'presence'");
  }
  const auto systems = parse_system_pair(a.systems);
  const auto scores = load_score_table(a.scores);
  const auto meta = load_language_metadata(a.metadata);
  std::optional<std::string> cond;
  if (!a.condition.empty()) cond = a.condition;
  const auto rep = evaluate_predictor(scores, meta, rule, systems, cond);

  Table t{{"code", "script", "subgrouping", "in_pretraining", "category", "score_" + systems.first,
           "score_" + systems.second, "predicted", "actual", "correct", "status"},
          {}};
  for (const auto& r : rep.rows) {
    t.add({r.code, r.script, r.subgrouping, r.in_pretraining, std::string(to_string(r.category)),
           r.score_first, r.score_second, r.predicted, r.actual, r.correct,
           std::string("evaluated")});
  }
  for (const auto& s : rep.skipped) {
    t.add({s.code, s.script, {}, {}, {}, {}, {}, {}, {}, {}, "skipped: " + s.reason});
  }
  ctx.summary("accuracy", rep.accuracy);
  ctx.summary("n_correct", rep.n_correct);
  ctx.summary("n_evaluated", rep.rows.size());
  ctx.summary("n_skipped", rep.skipped.size());
  ctx.emit(a.out, t,
           {{"rule", a.rule},
            {"accuracy", rep.accuracy},
            {"n_correct", rep.n_correct},
            {"n_evaluated", rep.rows.size()}});
  if (!a.out.empty()) {
    Table s{{"rule", "accuracy", "n_correct", "n_evaluated", "n_skipped"}, {}};
    s.add({a.rule, rep.accuracy, static_cast<long long>(rep.n_correct),
           static_cast<long long>(rep.rows.size()), static_cast<long long>(rep.skipped.size())});
    ctx.write("", report::to_csv(s));
  }
}

struct DegradeArgs {
  std::string scores_low, scores_high, groups = "latin:nonlatin", system, out, languages;
  double floor = 25.0;
};

inline void run_degrade(const DegradeArgs& a, RunContext& ctx) {
  ctx.input(a.scores_low);
  ctx.input(a.scores_high);
  ctx.param("floor", a.floor);
  ctx.param("groups", a.groups);
  const auto grouping = parse_script_grouping(a.groups);
  std::optional<std::string> sys;
  if (!a.system.empty()) sys = a.system;
  const auto rep = degradation_by_script(load_score_table(a.scores_low),
                                         load_score_table(a.scores_high), grouping, a.floor, sys);
  Table t{{"group", "n", "mean_low", "mean_high", "mean_drop", "mean_ratio", "median_low",
           "median_high", "median_drop", "median_ratio", "flag"},
          {}};
  for (const auto& g : rep.groups) {
    t.add({g.label, static_cast<long long>(g.n), g.mean_low, g.mean_high, g.mean_drop,
           g.mean_ratio, g.median_low, g.median_high, g.median_drop, g.median_ratio,
           std::string(g.flagged ? "empty" : "")});
  }
  ctx.summary("n_included", rep.included.size());
  ctx.summary("n_excluded", rep.excluded.size());
  ctx.summary("n_missing", rep.missing.size());
  ctx.emit(a.out, t);
  if (!a.languages.empty()) {
    Table l{{"code", "script", "group", "low", "high", "status"}, {}};
    for (const auto& x : rep.included) l.add({x.code, x.script, x.group, x.low, x.high, std::string("included")});
    for (const auto& x : rep.excluded) l.add({x.code, x.script, x.group, x.low, x.high, std::string("excluded")});
    for (const auto& x : rep.missing) l.add({x.code, x.script, x.group, x.low, x.high, std::string("missing")});
    ctx.emit(a.languages, l);
  }
}

struct ControlGenArgs {
  std::string corpus, align, src_tags, ref_tags, out_corpus, out_log, pn_tags;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

inline void run_control_gen(const ControlGenArgs& a, RunContext& ctx) {
  for (const auto* p : {&a.corpus, &a.align, &a.src_tags, &a.ref_tags}) ctx.input(*p);
  std::uint64_t seed = a.seed;
  std::string seed_source = a.seed_given ? "flag" : "default";
  if (const char* env = std::getenv("CHARMT_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(std::string("CHARMT_SEED is not an unsigned integer: '") + env + "'");
    }
    seed_source = "CHARMT_SEED";
  }
  ctx.param("seed", seed);
  ctx.param("seed_source", seed_source);
  auto pn = default_proper_noun_tags();
  if (!a.pn_tags.empty()) {
    pn.clear();
    for (const auto& t : split_list(a.pn_tags)) pn.insert(t);
  }
  ctx.param("proper_noun_tags", std::vector<std::string>(pn.begin(), pn.end()));
  const auto control =
      generate_control(parse_corpus(a.corpus), parse_alignment_file(a.align),
                       load_tag_file(a.src_tags), load_tag_file(a.ref_tags), seed, pn);
  ctx.write(a.out_corpus, serialize_corpus(control.corpus));
  std::string log;
  for (const auto& r : control.replacements) log += serialize_replacement(r) + "\n";
  ctx.write(a.out_log, log);
  ctx.summary("n_records", control.corpus.records.size());
  ctx.summary("n_replacements", control.replacements.size());
}

struct ControlScoreArgs {
  std::string log, hyps, system, out;
};

inline void run_control_score(const ControlScoreArgs& a, RunContext& ctx) {
  ctx.input(a.log);
  ctx.input(a.hyps);
  const auto repl = load_replacement_log(a.log);
  const auto corpus = parse_corpus(a.hyps);
  std::string system = a.system;
  if (system.empty()) {
    const auto systems = corpus.systems();
    if (systems.size() != 1) {
      throw ValidationError("--hyps corpus has " + std::to_string(systems.size()) +
                            " systems; pass --system");
    }
    system = systems.front();
  }
  ctx.param("system", system);
  std::map<std::string, std::string, std::less<>> hyps;
  for (const auto& r : corpus.records) {
    auto it = r.hypotheses.find(system);
    if (it == r.hypotheses.end()) {
      throw ValidationError("record '" + r.id + "' has no hypothesis for system '" + system + "'");
    }
    hyps.emplace(r.id, it->second);
  }
  const double acc = copying_accuracy(repl, hyps);
  Table t{{"system", "n_replacements", "copying_accuracy"}, {}};
  t.add({system, static_cast<long long>(repl.size()), acc});
  ctx.emit(a.out, t);
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline int report_error(std::ostream& err, const char* kind, int code, const std::string& msg) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["exit_code"] = code;
  j["message"] = msg;
  err << j.dump() << "\n";
  return code;
}

/// Parses `args` (without the program name), runs the subcommand and returns
/// the process exit code.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"charmt: analyses for comparing character- and subword-level MT systems",
               "charmt"};
  app.set_version_flag("--version", std::string("charmt ") + std::string(kVersion) +
                                        " (data format " + std::to_string(kFormatVersion) + ")");
  app.require_subcommand(1);
  app.fallthrough();

  bool json = false;
  unsigned threads = 1;
  std::string manifest;
  app.add_flag("--json", json, "Write JSON with full-precision numbers instead of CSV");
  app.add_option("--threads", threads, "Worker threads (results do not depend on this)")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--manifest", manifest, "Run manifest path (default: <out>.manifest.json)");

  std::function<void(RunContext&)> action;
  std::string chosen;

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "Corpus-level chrF++, chrF or BLEU for one system");
  sc->add_option("--corpus", score.corpus)->required();
  sc->add_option("--system", score.system)->required();
  sc->add_option("--metric", score.metric)->check(CLI::IsMember({"chrfpp", "chrf", "bleu"}));
  sc->add_option("--per-sentence", score.per_sentence, "Write per-sentence scores to this CSV");
  sc->add_option("--out", score.out);
  sc->callback([&] { action = [&](RunContext& c) { run_score(score, c); }; chosen = "score"; });

  CompareArgs cmp;
  auto* cc = app.add_subcommand("compare", "Paired t-test on sentence-level scores of two systems");
  cc->add_option("--corpus", cmp.corpus)->required();
  cc->add_option("--systems", cmp.systems, "A,B")->required();
  cc->add_option("--metric", cmp.metric)->check(CLI::IsMember({"chrfpp", "chrf", "bleu"}));
  cc->add_option("--out", cmp.out);
  cc->callback([&] { action = [&](RunContext& c) { run_compare(cmp, c); }; chosen = "compare"; });

  OswArgs osw;
  auto add_word_opts = [&](CLI::App* s) {
    s->add_option("--corpus", osw.corpus)->required();
    s->add_option("--align-src-ref", osw.align_src_ref)->required();
    s->add_option("--align-src-hyp-A", osw.align_hyp_a)->required();
    s->add_option("--align-src-hyp-B", osw.align_hyp_b)->required();
    s->add_option("--systems", osw.systems, "A,B")->required();
    s->add_option("--out", osw.out)->required();
  };
  auto* oc = app.add_subcommand("osw", "Word accuracy by source-reference orthographic similarity");
  add_word_opts(oc);
  oc->add_option("--thresholds", osw.thresholds, "Comma-separated, default 0,0.1,...,1");
  oc->callback([&] { action = [&](RunContext& c) { run_osw(osw, c); }; chosen = "osw"; });

  auto* fc = app.add_subcommand("freq", "Word accuracy by training-data frequency");
  add_word_opts(fc);
  fc->add_option("--train-target", osw.train_target)->required();
  fc->add_option("--bins", osw.bins, "Comma-separated lower bounds, default 0,1,10,100,1000");
  fc->callback([&] { action = [&](RunContext& c) { run_freq(osw, c); }; chosen = "freq"; });

  AttrArgs attr;
  auto add_attr_opts = [&](CLI::App* s) {
    s->add_option("--attributions", attr.attributions)->required();
    s->add_option("--out", attr.out)->required();
    s->add_flag("--drop-eos", attr.drop_eos, "Exclude the end-of-sentence step");
    s->add_flag("--drop-prompt", attr.drop_prompt, "Exclude prompt bytes from source norms");
  };
  auto* ac = app.add_subcommand("attr-curves", "Source share by sentence byte position");
  add_attr_opts(ac);
  ac->add_option("--window", attr.window)->check(CLI::PositiveNumber);
  ac->callback([&] { action = [&](RunContext& c) { run_attr_curves(attr, c); }; chosen = "attr-curves"; });

  auto* aw = app.add_subcommand("attr-words", "Position-normalized source share by in-word byte");
  add_attr_opts(aw);
  aw->add_option("--max-pos", attr.max_pos);
  aw->callback([&] { action = [&](RunContext& c) { run_attr_words(attr, c); }; chosen = "attr-words"; });

  auto* ao = app.add_subcommand("attr-osw", "Source importance for similar vs dissimilar words");
  add_attr_opts(ao);
  ao->add_option("--corpus", attr.corpus)->required();
  ao->add_option("--align-src-ref", attr.align_src_ref)->required();
  ao->add_option("--osw-min", attr.osw_min)->check(CLI::Range(0.0, 1.0));
  ao->add_option("--nonosw-max", attr.nonosw_max)->check(CLI::Range(0.0, 1.0));
  ao->callback([&] { action = [&](RunContext& c) { run_attr_osw(attr, c); }; chosen = "attr-osw"; });

  ZeroshotArgs zs;
  auto* zc = app.add_subcommand("zeroshot-predict", "Resourcedness-based winner prediction");
  zc->add_option("--scores", zs.scores)->required();
  zc->add_option("--metadata", zs.metadata)->required();
  zc->add_option("--rule", zs.rule)->check(CLI::IsMember({"full", "presence"}));
  zc->add_option("--systems", zs.systems, "A,B (A is predicted for related languages)")->required();
  zc->add_option("--condition", zs.condition);
  zc->add_option("--out", zs.out)->required();
  zc->callback([&] { action = [&](RunContext& c) { run_zeroshot_predict(zs, c); }; chosen = "zeroshot-predict"; });

  DegradeArgs dg;
  auto* dc = app.add_subcommand("degrade", "Score change between two data conditions, by script");
  dc->add_option("--scores-low", dg.scores_low)->required();
  dc->add_option("--scores-high", dg.scores_high)->required();
  dc->add_option("--floor", dg.floor);
  dc->add_option("--groups", dg.groups, "e.g. latin:nonlatin or latin:cyrillic:multibyte");
  dc->add_option("--system", dg.system);
  dc->add_option("--languages", dg.languages, "Per-language CSV with inclusion status");
  dc->add_option("--out", dg.out)->required();
  dc->callback([&] { action = [&](RunContext& c) { run_degrade(dg, c); }; chosen = "degrade"; });

  ControlGenArgs cg;
  auto* gc = app.add_subcommand("control-gen", "Build the proper-noun copying control set");
  gc->add_option("--corpus", cg.corpus)->required();
  gc->add_option("--align", cg.align)->required();
  gc->add_option("--src-tags", cg.src_tags)->required();
  gc->add_option("--ref-tags", cg.ref_tags)->required();
  auto* seed_opt = gc->add_option("--seed", cg.seed, "Overridden by CHARMT_SEED");
  gc->add_option("--pn-tags", cg.pn_tags, "Proper-noun tags, default NNP,NNPS,PROPN");
  gc->add_option("--out-corpus", cg.out_corpus)->required();
  gc->add_option("--out-log", cg.out_log)->required();
  gc->callback([&] {
    cg.seed_given = seed_opt->count() > 0;
    action = [&](RunContext& c) { run_control_gen(cg, c); };
    chosen = "control-gen";
  });

  ControlScoreArgs cs;
  auto* ss = app.add_subcommand("control-score", "Copying accuracy on the control set");
  ss->add_option("--log", cs.log)->required();
  ss->add_option("--hyps", cs.hyps, "Corpus file with the system's translations")->required();
  ss->add_option("--system", cs.system);
  ss->add_option("--out", cs.out);
  ss->callback([&] { action = [&](RunContext& c) { run_control_score(cs, c); }; chosen = "control-score"; });

  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--threads" || a == "--manifest") {
      ++i;
      continue;
    }
    if (a.starts_with("-")) continue;
    if (app.get_subcommand_no_throw(a) == nullptr) {
      report_error(err, "usage", 1, "unknown subcommand '" + a + "'");
      err << app.help();
      return 1;
    }
    break;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", 1, e.what());
    err << app.help();
    return 1;
  }

  try {
    RunContext ctx(chosen, out);
    ctx.json = json;
    ctx.threads = threads;
    ctx.manifest_path = manifest;
    action(ctx);
    ctx.write_manifest();
    return 0;
  } catch (const ParseError& e) {
    return report_error(err, "parse", 1, e.what());
  } catch (const ValidationError& e) {
    return report_error(err, "validation", 1, e.what());
  } catch (const IoError& e) {
    return report_error(err, "io", 2, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(err, "io", 2, e.what());
  } catch (const std::exception& e) {
    return report_error(err, "internal", 3, e.what());
  }
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args);
}

}  // namespace charmt::cli
