#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "charmt/word_accuracy.hpp"
#include "test_util.hpp"

using namespace charmt;

namespace {

SentenceRecord rec(std::string id, std::string src, std::string ref, std::string a, std::string b) {
  return {std::move(id), std::move(src), std::move(ref), {{"A", std::move(a)}, {"B", std::move(b)}}};
}

/// Three sentences whose per-pair outcomes were enumerated by hand.
struct ThreeSentences {
  Corpus corpus;
  AlignmentMap src_ref, src_a, src_b;

  ThreeSentences() {
    corpus.records = {
        rec("s1", "Der Hund bellt laut", "The dog barks loudly", "The dog barks loud",
            "A hound barks loudly"),
        rec("s2", "Maria kauft Brot.", "Maria buys bread.", "Maria buys Bread.",
            "Mary purchases bread"),
        rec("s3", "Ich sehe das Haus", "I see the house", "I see house", "I the house see"),
    };
    src_ref = {{"s1", parse_alignment_line("0-0 1-1 2-2 3-3")},
               {"s2", parse_alignment_line("0-0 1-1 2-2")},
               {"s3", parse_alignment_line("0-0 1-1 2-2 3-3")}};
    src_a = {{"s1", parse_alignment_line("0-0 1-1 2-2 3-3")},
             {"s2", parse_alignment_line("0-0 1-1 2-2")},
             {"s3", parse_alignment_line("0-0 1-1 3-2")}};
    src_b = {{"s1", parse_alignment_line("0-0 1-1 2-2 3-3")},
             {"s2", parse_alignment_line("0-0 1-1 2-2")},
             {"s3", parse_alignment_line("0-0 1-3 2-1 3-2")}};
  }

  std::vector<PairOutcome> outcomes(unsigned threads = 1) const {
    return evaluate_word_pairs(corpus, src_ref, src_a, src_b, {"A", "B"}, threads);
  }
};

}  // namespace

TEST(WordPairs, SimilarityOfAlignedPair) {
  const auto r = rec("x", "gesundheit", "gezondheid", "", "");
  const auto pairs = extract_word_pairs(r, parse_alignment_line("0-0"));
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].similarity, 0.7);
  EXPECT_EQ(pairs[0].src_word, "gesundheit");
}

TEST(WordPairs, EmptyAlignmentAndRangeErrors) {
  const auto r = rec("s9", "a b c", "x y z", "", "");
  EXPECT_TRUE(extract_word_pairs(r, Alignment{}).empty());
  try {
    extract_word_pairs(r, parse_alignment_line("5-0"));
    FAIL() << "expected an index error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("s9"), std::string::npos);
  }
}

TEST(WordPairs, SimilarityIsCaseFoldedAndPunctuationFree) {
  const auto r = rec("x", "\"Berlin,\" sagte", "Berlin said", "", "");
  const auto pairs = extract_word_pairs(r, parse_alignment_line("0-0 1-1"));
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].src_word, "Berlin");
  EXPECT_EQ(pairs[0].similarity, 1.0);
  const auto skipped = extract_word_pairs(rec("y", "Ja - nein", "Yes no", "", ""),
                                          parse_alignment_line("0-0 1-1 2-1"));
  EXPECT_EQ(skipped.size(), 2u);
}

TEST(WordCorrect, IdentityAndDisjoint) {
  const std::string ref = "the quick brown fox";
  const auto r = rec("x", "der schnelle braune Fuchs", ref, "", "");
  const auto al = parse_alignment_line("0-0 1-1 2-2 3-3");
  for (const auto& p : extract_word_pairs(r, al)) {
    EXPECT_TRUE(word_correct(p, ref, al));
    EXPECT_FALSE(word_correct(p, "ein langsamer grauer Wolf", al));
  }
}

TEST(WordCorrect, HandEnumeratedOutcomes) {
  const ThreeSentences f;
  const auto out = f.outcomes();
  const std::vector<bool> a{true, true, true, false, true, true, true, true, true, false, true};
  const std::vector<bool> b{false, false, true, true, false, false, true, true, true, true, true};
  ASSERT_EQ(out.size(), a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].correct_first, a[i]) << i << " " << out[i].pair.ref_word;
    EXPECT_EQ(out[i].correct_second, b[i]) << i << " " << out[i].pair.ref_word;
  }
  EXPECT_EQ(out[6].pair.ref_word, "bread");
}

TEST(WordCorrect, InvariantToHypothesisWordOrder) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> words{"the", "house", "is", "big", "red", "old", "a"};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    std::vector<std::string> src, ref, hyp;
    for (std::size_t i = 0; i < n; ++i) {
      src.push_back("w" + std::to_string(i));
      ref.push_back(words[rng() % words.size()]);
      hyp.push_back(words[rng() % words.size()]);
    }
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& w : v) s += (s.empty() ? "" : " ") + w;
      return s;
    };
    Alignment al;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng() % 3) al.links.insert({i, rng() % n});
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> shuffled(n);
    for (std::size_t i = 0; i < n; ++i) shuffled[perm[i]] = hyp[i];
    Alignment moved;
    for (const auto& l : al.links) moved.links.insert({l.src, perm[l.tgt]});
    const auto r = rec("x", join(src), join(ref), "", "");
    Alignment diag;
    for (std::size_t i = 0; i < n; ++i) diag.links.insert({i, i});
    for (const auto& p : extract_word_pairs(r, diag)) {
      EXPECT_EQ(word_correct(p, join(hyp), al), word_correct(p, join(shuffled), moved));
    }
  }
}

TEST(SimilarityBins, ZeroThresholdEqualsOverall) {
  const ThreeSentences f;
  const auto out = f.outcomes();
  const auto all = overall_accuracy(out);
  const auto binned = accuracy_by_similarity(out, default_similarity_thresholds());
  EXPECT_EQ(binned.cumulative.bins[0].accuracy_first, all.accuracy_first);
  EXPECT_EQ(binned.cumulative.bins[0].accuracy_second, all.accuracy_second);
  EXPECT_EQ(all.n_pairs, 11u);
  EXPECT_DOUBLE_EQ(all.accuracy_first, 9.0 / 11.0);
  EXPECT_DOUBLE_EQ(all.accuracy_second, 7.0 / 11.0);
  std::size_t disjoint_total = 0;
  for (const auto& b : binned.disjoint.bins) {
    disjoint_total += b.n_pairs;
    if (!b.flagged) {
      EXPECT_GE(b.accuracy_first, 0.0);
      EXPECT_LE(b.accuracy_first, 1.0);
    }
  }
  EXPECT_EQ(disjoint_total, out.size());
}

TEST(SimilarityBins, IdenticalSystemsGiveZeroDelta) {
  const ThreeSentences f;
  const auto out = evaluate_word_pairs(f.corpus, f.src_ref, f.src_a, f.src_a, {"A", "A"});
  const auto binned = accuracy_by_similarity(out, default_similarity_thresholds());
  for (const auto* framing : {&binned.cumulative, &binned.disjoint}) {
    for (const auto& b : framing->bins) {
      if (b.flagged) {
        EXPECT_TRUE(std::isnan(b.delta));
      } else {
        EXPECT_EQ(b.delta, 0.0) << b.label;
      }
    }
  }
}

TEST(SimilarityBins, HighSimilarityPairsOnlyTranslatedByFirstSystem) {
  Corpus c;
  c.records = {rec("s1", "Hotel Restaurant Information Hund", "hotel restaurant information dog",
                   "hotel restaurant information dog", "inn eatery info dog")};
  AlignmentMap al{{"s1", parse_alignment_line("0-0 1-1 2-2 3-3")}};
  const auto out = evaluate_word_pairs(c, al, al, al, {"A", "B"});
  const auto binned = accuracy_by_similarity(out, default_similarity_thresholds());
  for (const auto& b : binned.cumulative.bins) {
    if (b.lower >= 0.7) {
      EXPECT_EQ(b.delta, 1.0) << b.label;
      EXPECT_EQ(b.n_pairs, 3u);
    }
  }
  EXPECT_EQ(binned.cumulative.bins[0].delta, 0.75);
  EXPECT_TRUE(binned.disjoint.bins[5].flagged);
  EXPECT_EQ(binned.disjoint.bins[10].n_pairs, 3u);
  EXPECT_EQ(binned.disjoint.bins[10].label, "[1,1]");
}

TEST(SimilarityBins, ThresholdValidation) {
  const std::vector<PairOutcome> none;
  EXPECT_THROW(accuracy_by_similarity(none, std::vector<double>{0.5, 0.2}), ValidationError);
  EXPECT_THROW(accuracy_by_similarity(none, std::vector<double>{0.0, 1.5}), ValidationError);
  EXPECT_THROW(accuracy_by_similarity(none, std::vector<double>{}), ValidationError);
}

TEST(Frequency, CountsFoldedWords) {
  const std::vector<std::string> lines{"a a b"};
  const auto t = build_frequency_table(lines);
  EXPECT_EQ(t.counts.size(), 2u);
  EXPECT_EQ(t.count("a"), 2);
  EXPECT_EQ(t.count("b"), 1);
  EXPECT_TRUE(build_frequency_table(std::vector<std::string>{}).counts.empty());
  const auto folded = build_frequency_table(std::vector<std::string>{"The the, THE! -- x"});
  EXPECT_EQ(folded.count("the"), 3);
  EXPECT_EQ(folded.counts.size(), 2u);
}

TEST(Frequency, MatchesIndependentRecount) {
  std::vector<std::string> lines;
  std::istringstream in(testutil::slurp(testutil::fixture("freq_sample.txt")));
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 100u);
  const auto table = build_frequency_table(lines);
  const auto oracle = testutil::load_json(testutil::fixture("freq_sample.counts.json"));
  ASSERT_EQ(table.counts.size(), oracle.size());
  for (const auto& [word, count] : oracle.items()) {
    EXPECT_EQ(table.count(word), count.get<long long>()) << word;
  }
}

TEST(Frequency, HandComputedBins) {
  const ThreeSentences f;
  const auto out = f.outcomes();
  const auto freq = build_frequency_table(
      std::vector<std::string>{"the the the the the the the the the the the the", "dog house see"});
  const auto b = accuracy_by_frequency(out, freq, default_frequency_bins());
  ASSERT_EQ(b.bins.size(), 5u);
  EXPECT_EQ(b.bins[0].n_pairs, 6u);
  EXPECT_DOUBLE_EQ(b.bins[0].delta, 5.0 / 6.0 - 4.0 / 6.0);
  EXPECT_EQ(b.bins[1].n_pairs, 3u);
  EXPECT_DOUBLE_EQ(b.bins[1].delta, 1.0 - 2.0 / 3.0);
  EXPECT_EQ(b.bins[2].n_pairs, 2u);
  EXPECT_EQ(b.bins[2].delta, 0.0);
  EXPECT_TRUE(b.bins[3].flagged);
  EXPECT_TRUE(b.bins[4].flagged);
  EXPECT_EQ(b.bins[4].label, "[1000,inf)");
}

TEST(Frequency, UnseenWordsLandInZeroBinAndBinsPartition) {
  const ThreeSentences f;
  const auto out = f.outcomes();
  const auto b = accuracy_by_frequency(out, FrequencyTable{}, default_frequency_bins());
  EXPECT_EQ(b.bins[0].n_pairs, out.size());
  const auto freq = build_frequency_table(std::vector<std::string>{"dog dog the I i see"});
  for (const auto& bins : {default_frequency_bins(), std::vector<double>{0, 2}, std::vector<double>{0}}) {
    const auto r = accuracy_by_frequency(out, freq, bins);
    std::size_t total = 0;
    for (const auto& bin : r.bins) total += bin.n_pairs;
    EXPECT_EQ(total, out.size());
  }
  EXPECT_THROW(accuracy_by_frequency(out, freq, std::vector<double>{1, 10}), ValidationError);
}

TEST(Frequency, IdenticalSystemsGiveZeroDelta) {
  const ThreeSentences f;
  const auto out = evaluate_word_pairs(f.corpus, f.src_ref, f.src_b, f.src_b, {"B", "B"});
  const auto b = accuracy_by_frequency(out, FrequencyTable{}, default_frequency_bins());
  for (const auto& bin : b.bins) {
    if (!bin.flagged) { EXPECT_EQ(bin.delta, 0.0); }
  }
}

TEST(WordAccuracy, ThreadCountDoesNotChangeOutcomes) {
  const ThreeSentences f;
  const auto one = f.outcomes(1);
  const auto four = f.outcomes(4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].id, four[i].id);
    EXPECT_EQ(one[i].pair.ref_index, four[i].pair.ref_index);
    EXPECT_EQ(one[i].correct_first, four[i].correct_first);
  }
}

TEST(WordAccuracy, RestrictedSubsetsStayInUnitInterval) {
  const ThreeSentences f;
  const auto out = f.outcomes();
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PairOutcome> subset;
    for (const auto& o : out) {
      if (rng() % 2) subset.push_back(o);
    }
    const auto acc = overall_accuracy(subset);
    if (subset.empty()) {
      EXPECT_TRUE(acc.flagged);
      continue;
    }
    EXPECT_GE(acc.accuracy_first, 0.0);
    EXPECT_LE(acc.accuracy_first, 1.0);
    EXPECT_GE(acc.accuracy_second, 0.0);
    EXPECT_LE(acc.accuracy_second, 1.0);
  }
}
