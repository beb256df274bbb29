#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "charmt/zeroshot.hpp"
#include "test_util.hpp"

using namespace charmt;

namespace {

std::vector<LanguageInfo> small_table() {
  return {{"ace_Latn", "Latin", "Malayo-Polynesian", false},
          {"ace_Arab", "Arabic", "Malayo-Polynesian", false},
          {"ind_Latn", "Latin", "Malayo-Polynesian", true},
          {"deu_Latn", "Latin", "Germanic", true},
          {"arb_Arab", "Arabic", "Semitic", true}};
}

ScoreTable scores(const std::vector<std::tuple<std::string, std::string, double, double>>& rows,
                  const std::string& cond = "10k") {
  ScoreTable t;
  for (const auto& [code, script, a, b] : rows) {
    t.entries[{"byt5", code, script, cond}] = a;
    t.entries[{"mt5", code, script, cond}] = b;
  }
  return t;
}

}  // namespace

TEST(Resourcedness, Categories) {
  const auto t = small_table();
  EXPECT_EQ(classify_resourcedness(t[0], t), ResourceCategory::LowRelated);
  EXPECT_EQ(classify_resourcedness(t[1], t), ResourceCategory::LowUnrelated);
  EXPECT_EQ(classify_resourcedness(t[3], t), ResourceCategory::HighResource);
  EXPECT_THROW(classify_resourcedness({"xxx_Latn", "Latin", "?", false}, t), ValidationError);
  std::vector<LanguageInfo> none{{"a", "Latin", "g", false}};
  EXPECT_THROW(classify_resourcedness(none[0], none), ValidationError);
}

TEST(Resourcedness, BundledMetadataExamples) {
  const auto t = load_language_metadata(testutil::data("flores200_metadata.tsv"));
  auto find = [&](const std::string& code) {
    return *std::find_if(t.begin(), t.end(), [&](const auto& l) { return l.code == code; });
  };
  EXPECT_EQ(classify_resourcedness(find("ace_Latn"), t), ResourceCategory::LowRelated);
  EXPECT_EQ(classify_resourcedness(find("ace_Arab"), t), ResourceCategory::LowUnrelated);
  EXPECT_EQ(classify_resourcedness(find("deu_Latn"), t), ResourceCategory::HighResource);
}

TEST(Resourcedness, AddingPretrainedLanguageOnlyMovesUp) {
  std::mt19937_64 rng(6);
  const std::vector<std::string> scripts{"Latin", "Arabic", "Cyrillic"};
  const std::vector<std::string> groups{"g1", "g2", "g3", "g4"};
  auto rank = [](ResourceCategory c) {
    return c == ResourceCategory::HighResource ? 2 : c == ResourceCategory::LowRelated ? 1 : 0;
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LanguageInfo> t;
    for (int i = 0; i < 12; ++i) {
      t.push_back({"l" + std::to_string(i), scripts[rng() % 3], groups[rng() % 4], rng() % 3 == 0});
    }
    t[0].in_pretraining = true;
    auto more = t;
    more.push_back({"new", scripts[rng() % 3], groups[rng() % 4], true});
    for (const auto& l : t) {
      EXPECT_GE(rank(classify_resourcedness(l, more)), rank(classify_resourcedness(l, t)));
    }
  }
}

TEST(Predictor, AllCorrectGivesOne) {
  const auto t = small_table();
  const auto s = scores({{"ace_Latn", "Latin", 30, 20},
                         {"ace_Arab", "Arabic", 10, 20},
                         {"ind_Latn", "Latin", 50, 40},
                         {"deu_Latn", "Latin", 60, 55},
                         {"arb_Arab", "Arabic", 40, 30}});
  const auto r = evaluate_predictor(s, t, PredictorRule::SubgroupAndScript, {"byt5", "mt5"});
  EXPECT_EQ(r.rows.size(), 5u);
  EXPECT_EQ(r.accuracy, 1.0);
  const auto p = evaluate_predictor(s, t, PredictorRule::PresenceOnly, {"byt5", "mt5"});
  EXPECT_DOUBLE_EQ(p.accuracy, 4.0 / 5.0);
}

TEST(Predictor, TiesCountAsWrongAndMissingScoresAreSkipped) {
  const auto t = small_table();
  auto s = scores({{"ace_Latn", "Latin", 30, 30}, {"deu_Latn", "Latin", 60, 55}});
  s.entries[{"byt5", "ind_Latn", "Latin", "10k"}] = 40;
  s.entries[{"byt5", "zzz_Latn", "Latin", "10k"}] = 40;
  s.entries[{"mt5", "zzz_Latn", "Latin", "10k"}] = 30;
  const auto r = evaluate_predictor(s, t, PredictorRule::SubgroupAndScript, {"byt5", "mt5"});
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].actual, "tie");
  EXPECT_FALSE(r.rows[0].correct);
  EXPECT_EQ(r.accuracy, 0.5);
  std::vector<std::string> skipped;
  for (const auto& k : r.skipped) skipped.push_back(k.code + ":" + k.reason);
  EXPECT_EQ(skipped.size(), 4u);
  EXPECT_NE(std::find(skipped.begin(), skipped.end(), "ind_Latn:missing score for mt5"), skipped.end());
  EXPECT_NE(std::find(skipped.begin(), skipped.end(), "zzz_Latn:no metadata"), skipped.end());
}

TEST(Predictor, ConditionMustBeUnambiguous) {
  const auto t = small_table();
  auto s = scores({{"deu_Latn", "Latin", 60, 55}});
  const auto s250 = scores({{"deu_Latn", "Latin", 70, 65}}, "250k");
  s.entries.insert(s250.entries.begin(), s250.entries.end());
  EXPECT_THROW(evaluate_predictor(s, t, PredictorRule::PresenceOnly, {"byt5", "mt5"}), ValidationError);
  const auto r = evaluate_predictor(s, t, PredictorRule::PresenceOnly, {"byt5", "mt5"}, "250k");
  EXPECT_EQ(r.rows.at(0).score_first, 70.0);
}

TEST(Predictor, BundledTableAccuracies) {
  const auto s = load_score_table(testutil::data("table5_deu_eng_10k.csv"));
  const auto t = load_language_metadata(testutil::data("flores200_metadata.tsv"));
  const auto full = evaluate_predictor(s, t, PredictorRule::SubgroupAndScript, {"byt5", "mt5"});
  const auto presence = evaluate_predictor(s, t, PredictorRule::PresenceOnly, {"byt5", "mt5"});
  EXPECT_NEAR(full.accuracy, 0.89, 0.03);
  EXPECT_NEAR(presence.accuracy, 0.62, 0.02);
  EXPECT_TRUE(full.skipped.empty());
  for (const auto* rep : {&full, &presence}) {
    std::size_t correct = 0;
    for (const auto& row : rep->rows) {
      correct += row.correct ? 1 : 0;
      const double d = row.score_first - row.score_second;
      EXPECT_EQ(row.actual, d > 0 ? "byt5" : d < 0 ? "mt5" : "tie") << row.code;
    }
    EXPECT_EQ(correct, rep->n_correct);
    EXPECT_DOUBLE_EQ(rep->accuracy, static_cast<double>(correct) / static_cast<double>(rep->rows.size()));
  }
}

TEST(ScriptGrouping, Parsing) {
  const auto g = parse_script_grouping("latin:cyrillic:multibyte");
  EXPECT_EQ(g.group_of("Latin"), "latin");
  EXPECT_EQ(g.group_of("CYRILLIC"), "cyrillic");
  EXPECT_EQ(g.group_of("Devanagari"), "multibyte");
  EXPECT_EQ(g.group_order(), (std::vector<std::string>{"latin", "cyrillic", "multibyte"}));
  EXPECT_THROW(parse_script_grouping("latin"), ParseError);
  EXPECT_THROW(parse_script_grouping("latin::x"), ParseError);
}

namespace {

ScoreTable one_system(const std::vector<std::tuple<std::string, std::string, double>>& rows,
                      const std::string& cond) {
  ScoreTable t;
  for (const auto& [code, script, v] : rows) t.entries[{"byt5", code, script, cond}] = v;
  return t;
}

}  // namespace

TEST(Degradation, FloorIsInclusiveAndMeansMatchHandComputation) {
  const auto low = one_system({{"deu", "Latin", 60}, {"fra", "Latin", 50}, {"tur", "Latin", 25},
                               {"vie", "Latin", 40}, {"rus", "Cyrillic", 45}, {"ukr", "Cyrillic", 35}},
                              "10k");
  const auto high = one_system({{"deu", "Latin", 55}, {"fra", "Latin", 48}, {"tur", "Latin", 20},
                                {"vie", "Latin", 30}, {"rus", "Cyrillic", 30}, {"ukr", "Cyrillic", 20}},
                               "250k");
  const auto r = degradation_by_script(low, high, parse_script_grouping("latin:nonlatin"));
  ASSERT_EQ(r.excluded.size(), 1u);
  EXPECT_EQ(r.excluded[0].code, "tur");
  ASSERT_EQ(r.groups.size(), 2u);
  const auto& latin = r.groups[0];
  EXPECT_EQ(latin.n, 3u);
  EXPECT_EQ(latin.mean_low, 50.0);
  EXPECT_EQ(latin.mean_high, (55.0 + 48.0 + 30.0) / 3.0);
  EXPECT_EQ(latin.mean_drop, (5.0 + 2.0 + 10.0) / 3.0);
  EXPECT_EQ(latin.mean_ratio, (55.0 / 60.0 + 48.0 / 50.0 + 30.0 / 40.0) / 3.0);
  EXPECT_EQ(latin.median_low, 50.0);
  EXPECT_EQ(latin.median_drop, 5.0);
  const auto& other = r.groups[1];
  EXPECT_EQ(other.n, 2u);
  EXPECT_EQ(other.mean_low, 40.0);
  EXPECT_EQ(other.mean_high, 25.0);
  EXPECT_EQ(other.mean_drop, 15.0);
  EXPECT_EQ(other.median_ratio, (30.0 / 45.0 + 20.0 / 35.0) / 2.0);
}

TEST(Degradation, IdenticalConditionsGiveZeroDropAndUnitRatio) {
  const auto low = one_system({{"a", "Latin", 60}, {"b", "Cyrillic", 50}, {"c", "Han", 30}}, "10k");
  const auto high = one_system({{"a", "Latin", 60}, {"b", "Cyrillic", 50}, {"c", "Han", 30}}, "250k");
  const auto r = degradation_by_script(low, high, parse_script_grouping("latin:cyrillic:multibyte"));
  for (const auto& g : r.groups) {
    EXPECT_EQ(g.mean_drop, 0.0);
    EXPECT_EQ(g.mean_ratio, 1.0);
  }
}

TEST(Degradation, EmptyGroupsFlaggedAndMissingListed) {
  const auto low = one_system({{"a", "Latin", 60}, {"b", "Cyrillic", 20}, {"c", "Latin", 40}}, "10k");
  const auto high = one_system({{"a", "Latin", 50}, {"b", "Cyrillic", 10}}, "250k");
  const auto r = degradation_by_script(low, high, parse_script_grouping("latin:nonlatin"));
  EXPECT_TRUE(r.groups[1].flagged);
  EXPECT_TRUE(std::isnan(r.groups[1].mean_low));
  ASSERT_EQ(r.missing.size(), 1u);
  EXPECT_EQ(r.missing[0].code, "c");
  EXPECT_EQ(r.included.size() + r.excluded.size() + r.missing.size(), 3u);
}

TEST(Degradation, InvariantToRowOrder) {
  std::mt19937_64 rng(30);
  const std::vector<std::string> scripts{"Latin", "Cyrillic", "Devanagari"};
  std::vector<std::tuple<std::string, std::string, double>> lows, highs;
  for (int i = 0; i < 30; ++i) {
    const auto s = scripts[rng() % 3];
    lows.emplace_back("l" + std::to_string(i), s, static_cast<double>(rng() % 80));
    highs.emplace_back("l" + std::to_string(i), s, static_cast<double>(rng() % 80));
  }
  const auto grouping = parse_script_grouping("latin:cyrillic:multibyte");
  const auto base = degradation_by_script(one_system(lows, "10k"), one_system(highs, "250k"), grouping);
  EXPECT_EQ(base.included.size() + base.excluded.size(), 30u);
  for (const auto& e : base.excluded) EXPECT_LE(e.low, 25.0);
  for (const auto& e : base.included) EXPECT_GT(e.low, 25.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(lows.begin(), lows.end(), rng);
    std::shuffle(highs.begin(), highs.end(), rng);
    const auto again = degradation_by_script(one_system(lows, "10k"), one_system(highs, "250k"), grouping);
    for (std::size_t g = 0; g < base.groups.size(); ++g) {
      EXPECT_EQ(again.groups[g].n, base.groups[g].n);
      if (base.groups[g].n) { EXPECT_EQ(again.groups[g].mean_drop, base.groups[g].mean_drop); }
    }
  }
}

TEST(Degradation, SystemSelection) {
  auto low = one_system({{"a", "Latin", 60}}, "10k");
  low.entries[{"mt5", "a", "Latin", "10k"}] = 50;
  const auto high = one_system({{"a", "Latin", 40}}, "250k");
  const auto g = parse_script_grouping("latin:nonlatin");
  EXPECT_THROW(degradation_by_script(low, high, g), ValidationError);
  EXPECT_EQ(degradation_by_script(low, high, g, 25, "byt5").groups[0].mean_drop, 20.0);
}
