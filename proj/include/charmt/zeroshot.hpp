#pragma once

// Zero-shot analyses over chrF++ score tables: resourcedness categories and
// the winner predictor built on them, and degradation grouped by script.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "charmt/corpus_io.hpp"
#include "charmt/error.hpp"
#include "charmt/text.hpp"

namespace charmt {

enum class ResourceCategory { HighResource, LowRelated, LowUnrelated };

inline std::string_view to_string(ResourceCategory c) {
  switch (c) {
    case ResourceCategory::HighResource: return "high_resource";
    case ResourceCategory::LowRelated: return "low_related";
    case ResourceCategory::LowUnrelated: return "low_unrelated";
  }
  return "?";
}

namespace zs_detail {

inline const LanguageInfo* find(std::span<const LanguageInfo> table, std::string_view code,
                                std::string_view script) {
  for (const auto& l : table) {
    if (l.code == code && l.script == script) return &l;
  }
  return nullptr;
}

}  // namespace zs_detail

/// High resource if the language is in pretraining; low resource, related if
/// a pretraining language shares both its subgrouping and its script; low
/// resource, unrelated otherwise. Flags are read from `table`.
inline ResourceCategory classify_resourcedness(const LanguageInfo& lang,
                                               std::span<const LanguageInfo> table) {
  const auto* entry = zs_detail::find(table, lang.code, lang.script);
  if (entry == nullptr) {
    throw ValidationError("language (" + lang.code + ", " + lang.script +
                          ") is not in the metadata table");
  }
  bool any_pretrained = false;
  bool related = false;
  for (const auto& other : table) {
    if (!other.in_pretraining) continue;
    any_pretrained = true;
    if (other.subgrouping == entry->subgrouping && other.script == entry->script) related = true;
  }
  if (!any_pretrained) throw ValidationError("metadata table has no pretraining language");
  if (entry->in_pretraining) return ResourceCategory::HighResource;
  return related ? ResourceCategory::LowRelated : ResourceCategory::LowUnrelated;
}

enum class PredictorRule {
  PresenceOnly,       // first system wins iff the language was pretrained
  SubgroupAndScript,  // first system wins iff high resource or related
};

struct PredictorRow {
  std::string code;
  std::string script;
  std::string subgrouping;
  bool in_pretraining = false;
  ResourceCategory category = ResourceCategory::LowUnrelated;
  double score_first = 0;
  double score_second = 0;
  std::string predicted;  // system name
  std::string actual;     // system name, or "tie"
  bool correct = false;
};

struct SkippedLanguage {
  std::string code;
  std::string script;
  std::string reason;
};

struct PredictorReport {
  std::vector<PredictorRow> rows;
  std::vector<SkippedLanguage> skipped;
  std::size_t n_correct = 0;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
};

namespace zs_detail {

/// The single condition present in the table, or `requested` if given.
inline std::string pick_condition(const ScoreTable& scores,
                                  const std::optional<std::string>& requested) {
  if (requested) return *requested;
  std::set<std::string> conds;
  for (const auto& [k, _] : scores.entries) conds.insert(k.condition);
  if (conds.size() != 1) {
    throw ValidationError("score table holds " + std::to_string(conds.size()) +
                          " conditions; choose one explicitly");
  }
  return *conds.begin();
}

}  // namespace zs_detail

/// Predicts the better of two systems per language and checks the prediction
/// against the scores. Exact ties count as wrong. Languages missing a score
/// or missing from the metadata are listed in `skipped`.
inline PredictorReport evaluate_predictor(const ScoreTable& scores,
                                          std::span<const LanguageInfo> table, PredictorRule rule,
                                          const std::pair<std::string, std::string>& systems,
                                          const std::optional<std::string>& condition = {}) {
  const auto cond = zs_detail::pick_condition(scores, condition);
  const auto& [first, second] = systems;
  PredictorReport report;
  std::set<std::pair<std::string, std::string>> done;
  for (const auto& lang : table) {
    done.emplace(lang.code, lang.script);
    const auto a = scores.get({first, lang.code, lang.script, cond});
    const auto b = scores.get({second, lang.code, lang.script, cond});
    if (!a || !b) {
      report.skipped.push_back(
          {lang.code, lang.script, std::string("missing score for ") + (!a ? first : second)});
      continue;
    }
    PredictorRow row;
    row.code = lang.code;
    row.script = lang.script;
    row.subgrouping = lang.subgrouping;
    row.in_pretraining = lang.in_pretraining;
    row.category = classify_resourcedness(lang, table);
    row.score_first = *a;
    row.score_second = *b;
    const bool predict_first = rule == PredictorRule::PresenceOnly
                                   ? lang.in_pretraining
                                   : row.category != ResourceCategory::LowUnrelated;
    row.predicted = predict_first ? first : second;
    row.actual = *a > *b ? first : (*b > *a ? second : std::string("tie"));
    row.correct = row.predicted == row.actual;
    report.n_correct += row.correct ? 1 : 0;
    report.rows.push_back(std::move(row));
  }
  for (const auto& [k, _] : scores.entries) {
    if (k.condition != cond || (k.system != first && k.system != second)) continue;
    if (done.emplace(k.code, k.script).second) {
      report.skipped.push_back({k.code, k.script, "no metadata"});
    }
  }
  if (!report.rows.empty()) {
    report.accuracy =
        static_cast<double>(report.n_correct) / static_cast<double>(report.rows.size());
  }
  return report;
}

/// Maps script names to group labels; anything unlisted goes to `fallback`.
struct ScriptGrouping {
  std::vector<std::pair<std::string, std::string>> labels;  // script -> label, in order
  std::string fallback;

  std::string group_of(std::string_view script) const {
    const auto folded = text::fold_case(script);
    for (const auto& [s, label] : labels) {
      if (text::fold_case(s) == folded) return label;
    }
    return fallback;
  }

  std::vector<std::string> group_order() const {
    std::vector<std::string> out;
    for (const auto& [_, label] : labels) {
      if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
    }
    if (std::find(out.begin(), out.end(), fallback) == out.end()) out.push_back(fallback);
    return out;
  }
};

/// "latin:nonlatin" or "latin:cyrillic:multibyte": every label but the last
/// names a script (case-insensitive); the last label collects the rest.
inline ScriptGrouping parse_script_grouping(std::string_view spec) {
  ScriptGrouping g;
  auto parts = io_detail::split(spec, ':');
  if (parts.size() < 2) {
    throw ParseError("script grouping '" + std::string(spec) +
                     "' needs at least two labels separated by ':'");
  }
  for (const auto& p : parts) {
    if (p.empty()) throw ParseError("script grouping '" + std::string(spec) + "' has an empty label");
  }
  g.fallback = parts.back();
  parts.pop_back();
  for (auto& p : parts) g.labels.emplace_back(p, p);
  return g;
}

struct DegradationGroup {
  std::string label;
  std::size_t n = 0;
  double mean_low = std::numeric_limits<double>::quiet_NaN();
  double mean_high = std::numeric_limits<double>::quiet_NaN();
  double mean_drop = std::numeric_limits<double>::quiet_NaN();   // low - high
  double mean_ratio = std::numeric_limits<double>::quiet_NaN();  // high / low
  double median_low = std::numeric_limits<double>::quiet_NaN();
  double median_high = std::numeric_limits<double>::quiet_NaN();
  double median_drop = std::numeric_limits<double>::quiet_NaN();
  double median_ratio = std::numeric_limits<double>::quiet_NaN();
  bool flagged = true;  // empty after filtering
};

struct LanguageScore {
  std::string code;
  std::string script;
  double low = 0;
  double high = std::numeric_limits<double>::quiet_NaN();
  std::string group;
};

struct DegradationReport {
  std::vector<DegradationGroup> groups;
  std::vector<LanguageScore> included;
  std::vector<LanguageScore> excluded;  // low-condition score at or below the floor
  std::vector<LanguageScore> missing;   // no high-condition score
};

namespace zs_detail {

inline double median(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[m] : (xs[m - 1] + xs[m]) / 2.0;
}

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline std::string pick_system(const ScoreTable& t, const std::optional<std::string>& requested) {
  if (requested) return *requested;
  std::set<std::string> systems;
  for (const auto& [k, _] : t.entries) systems.insert(k.system);
  if (systems.size() != 1) {
    throw ValidationError("score table holds " + std::to_string(systems.size()) +
                          " systems; choose one explicitly");
  }
  return *systems.begin();
}

}  // namespace zs_detail

/// Groups languages by script and compares the low-data and high-data
/// condition scores of one system. Languages scoring at or below `floor` in
/// the low condition are excluded.
inline DegradationReport degradation_by_script(const ScoreTable& scores_low,
                                               const ScoreTable& scores_high,
                                               const ScriptGrouping& groups, double floor = 25.0,
                                               const std::optional<std::string>& system = {}) {
  const auto sys = zs_detail::pick_system(scores_low, system);
  DegradationReport report;
  // Keyed by (code, script) so row order in either table does not matter.
  std::map<std::pair<std::string, std::string>, double> low;
  for (const auto& [k, v] : scores_low.entries) {
    if (k.system != sys) continue;
    if (!low.emplace(std::pair(k.code, k.script), v).second) {
      throw ValidationError("low-condition table has several conditions for (" + k.code + ", " +
                            k.script + ")");
    }
  }
  std::map<std::pair<std::string, std::string>, double> high;
  for (const auto& [k, v] : scores_high.entries) {
    if (k.system != sys) continue;
    if (!high.emplace(std::pair(k.code, k.script), v).second) {
      throw ValidationError("high-condition table has several conditions for (" + k.code + ", " +
                            k.script + ")");
    }
  }
  if (low.empty()) throw ValidationError("no low-condition scores for system '" + sys + "'");

  const auto order = groups.group_order();
  std::map<std::string, std::vector<const LanguageScore*>> members;
  for (const auto& [key, lo] : low) {
    LanguageScore ls{key.first, key.second, lo, std::numeric_limits<double>::quiet_NaN(),
                     groups.group_of(key.second)};
    if (lo <= floor) {
      if (auto it = high.find(key); it != high.end()) ls.high = it->second;
      report.excluded.push_back(std::move(ls));
      continue;
    }
    auto it = high.find(key);
    if (it == high.end()) {
      report.missing.push_back(std::move(ls));
      continue;
    }
    ls.high = it->second;
    report.included.push_back(std::move(ls));
  }
  for (const auto& ls : report.included) members[ls.group].push_back(&ls);

  for (const auto& label : order) {
    DegradationGroup g;
    g.label = label;
    std::vector<double> lows, highs, drops, ratios;
    for (const auto* ls : members[label]) {
      lows.push_back(ls->low);
      highs.push_back(ls->high);
      drops.push_back(ls->low - ls->high);
      ratios.push_back(ls->high / ls->low);
    }
    g.n = lows.size();
    g.flagged = g.n == 0;
    g.mean_low = zs_detail::mean(lows);
    g.mean_high = zs_detail::mean(highs);
    g.mean_drop = zs_detail::mean(drops);
    g.mean_ratio = zs_detail::mean(ratios);
    g.median_low = zs_detail::median(lows);
    g.median_high = zs_detail::median(highs);
    g.median_drop = zs_detail::median(drops);
    g.median_ratio = zs_detail::median(ratios);
    report.groups.push_back(std::move(g));
  }
  return report;
}

}  // namespace charmt
