#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "charmt/corpus_io.hpp"
#include "charmt/metrics.hpp"
#include "test_util.hpp"

using namespace charmt;

namespace {

struct FiftyPairs {
  std::vector<std::string> refs;
  std::map<std::string, std::vector<std::string>> hyps;
  nlohmann::json expected;

  FiftyPairs() {
    const auto c = parse_corpus(testutil::fixture("fifty_pairs.jsonl"));
    for (const auto& r : c.records) {
      refs.push_back(r.reference);
      for (const auto& [sys, h] : r.hypotheses) hyps[sys].push_back(h);
    }
    expected = testutil::load_json(testutil::fixture("fifty_pairs.expected.json"));
  }
};

const FiftyPairs& fifty() {
  static const FiftyPairs f;
  return f;
}

}  // namespace

TEST(Chrf, PerfectAndDisjoint) {
  EXPECT_DOUBLE_EQ(chrf_sentence("Das ist ein Test.", "Das ist ein Test."), 100.0);
  EXPECT_DOUBLE_EQ(chrf_sentence("xyz", "abc"), 0.0);
  EXPECT_DOUBLE_EQ(chrf_sentence("", "abc"), 0.0);
  EXPECT_THROW(chrf_sentence("abc", ""), ValidationError);
  EXPECT_THROW(chrf_sentence("abc", "   "), ValidationError);
}

TEST(Chrf, SelfScoreIsHundredWhenEveryOrderHasNgrams) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> words{"a", "Haus", "ist", "groß", "Иван", "!", "x,y"};
  for (int i = 0; i < 200; ++i) {
    std::string s;
    const int n = 6 + static_cast<int>(rng() % 4);
    for (int k = 0; k < n; ++k) s += (k ? " " : "") + words[rng() % words.size()];
    const ChrfParams p{1 + static_cast<int>(rng() % 6), static_cast<int>(rng() % 3),
                       0.5 + static_cast<double>(rng() % 4)};
    EXPECT_DOUBLE_EQ(chrf_sentence(s, s, p), 100.0) << s;
  }
}

TEST(Chrf, OrdersWithoutNgramsScoreZero) {
  EXPECT_DOUBLE_EQ(chrf_sentence("a", "a"), 25.0);
  EXPECT_DOUBLE_EQ(chrf_sentence("ab", "ab", ChrfParams{2, 0, 2.0}), 100.0);
  EXPECT_DOUBLE_EQ(chrf_sentence("ab", "ab", ChrfParams{4, 0, 2.0}), 50.0);
}

TEST(Chrf, CharacterComponentIgnoresWhitespace) {
  const ChrfParams chars_only{4, 0, 2.0};
  EXPECT_DOUBLE_EQ(chrf_sentence("ab cd", "abcd", chars_only), 100.0);
  EXPECT_DOUBLE_EQ(chrf_sentence("  abcd  ", "abcd", chars_only), 100.0);
}

TEST(Chrf, SingleSentenceCorpusEqualsSentenceScore) {
  const auto& f = fifty();
  for (std::size_t i = 0; i < f.refs.size(); ++i) {
    const std::vector<std::string> h{f.hyps.at("byt5")[i]}, r{f.refs[i]};
    EXPECT_DOUBLE_EQ(chrf_pp(h, r).value, chrf_sentence(h[0], r[0]));
  }
}

TEST(Chrf, InvalidParamsRejected) {
  EXPECT_THROW(ChrfParams({0, 2, 2.0}).validate(), ValidationError);
  EXPECT_THROW(ChrfParams({6, -1, 2.0}).validate(), ValidationError);
  EXPECT_THROW(ChrfParams({6, 2, 0.0}).validate(), ValidationError);
  const std::vector<std::string> one{"a"}, two{"a", "b"};
  EXPECT_THROW(chrf_pp(one, two), ValidationError);
}

TEST(Chrf, MatchesOracleOnFiftyPairs) {
  const auto& f = fifty();
  for (const std::string sys : {"byt5", "mt5"}) {
    const auto& exp = f.expected.at(sys);
    const auto s = chrf_pp(f.hyps.at(sys), f.refs, ChrfParams{}, true);
    EXPECT_NEAR(s.value, exp.at("chrfpp_corpus").get<double>(), 1e-4) << sys;
    const auto per = exp.at("chrfpp_sentences").get<std::vector<double>>();
    ASSERT_EQ(s.per_sentence->size(), per.size());
    for (std::size_t i = 0; i < per.size(); ++i) {
      EXPECT_NEAR((*s.per_sentence)[i], per[i], 1e-4) << sys << " sentence " << i;
    }
    const auto plain = chrf_pp(f.hyps.at(sys), f.refs, ChrfParams{6, 0, 2.0});
    EXPECT_NEAR(plain.value, exp.at("chrf_corpus").get<double>(), 1e-4) << sys;
  }
}

TEST(Chrf, ThreadCountDoesNotChangeResult) {
  const auto& f = fifty();
  const auto one = chrf_pp(f.hyps.at("mt5"), f.refs, ChrfParams{}, true, 1);
  for (unsigned t : {2u, 3u, 8u, 64u}) {
    const auto many = chrf_pp(f.hyps.at("mt5"), f.refs, ChrfParams{}, true, t);
    EXPECT_EQ(one.value, many.value);
    EXPECT_EQ(*one.per_sentence, *many.per_sentence);
  }
}

TEST(Bleu, Tokenizer) {
  EXPECT_EQ(bleu_tokenize("Hello, world!"),
            (std::vector<std::string>{"Hello", ",", "world", "!"}));
  EXPECT_EQ(bleu_tokenize("  a  b "), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(bleu_tokenize("(in oil)"), (std::vector<std::string>{"(", "in", "oil", ")"}));
}

TEST(Bleu, PerfectAndZero) {
  const std::vector<std::string> r{"the cat sat on the mat", "a b c d e"};
  EXPECT_DOUBLE_EQ(bleu(r, r).value, 100.0);
  const std::vector<std::string> none{"x y z w v", "q r s t u"};
  EXPECT_DOUBLE_EQ(bleu(none, r).value, 0.0);
  const std::vector<std::string> one{"a"};
  EXPECT_THROW(bleu(one, r), ValidationError);
}

TEST(Bleu, BrevityPenalty) {
  const std::vector<std::string> h{"a b c d"}, r{"a b c d e f g h"};
  EXPECT_NEAR(bleu(h, r).value, 100.0 * std::exp(1.0 - 2.0), 1e-12);
}

TEST(Bleu, MatchesOracleOnFiftyPairs) {
  const auto& f = fifty();
  for (const std::string sys : {"byt5", "mt5"}) {
    EXPECT_NEAR(bleu(f.hyps.at(sys), f.refs).value,
                f.expected.at(sys).at("bleu_corpus").get<double>(), 1e-4)
        << sys;
  }
}

TEST(TTest, MatchesOracle) {
  const auto cases = testutil::load_json(testutil::fixture("ttest_oracle.json"));
  ASSERT_EQ(cases.size(), 20u);
  for (const auto& c : cases) {
    const auto a = c.at("a").get<std::vector<double>>();
    const auto b = c.at("b").get<std::vector<double>>();
    const auto r = paired_t_test(a, b);
    EXPECT_NEAR(r.t, c.at("t").get<double>(), 1e-6);
    EXPECT_NEAR(r.p, c.at("p").get<double>(), 1e-6);
    EXPECT_EQ(r.n, 30u);
  }
}

TEST(TTest, Conventions) {
  const std::vector<double> a{1.5, 2.5, 3.25, 4.0};
  const auto same = paired_t_test(a, a);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p, 1.0);
  std::vector<double> b;
  for (double x : a) b.push_back(x + 0.3);
  const auto shifted = paired_t_test(a, b);
  EXPECT_EQ(shifted.p, 0.0);
  EXPECT_TRUE(std::isinf(shifted.t) && shifted.t < 0);
  EXPECT_THROW(paired_t_test(std::vector<double>{1}, std::vector<double>{2}), ValidationError);
  EXPECT_THROW(paired_t_test(a, std::vector<double>{1, 2}), ValidationError);
}

TEST(TTest, AntisymmetricInArguments) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(50, 10);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a(12), b(12);
    for (auto& x : a) x = g(rng);
    for (auto& x : b) x = g(rng);
    const auto ab = paired_t_test(a, b);
    const auto ba = paired_t_test(b, a);
    EXPECT_DOUBLE_EQ(ab.t, -ba.t);
    EXPECT_DOUBLE_EQ(ab.p, ba.p);
    EXPECT_GE(ab.p, 0.0);
    EXPECT_LE(ab.p, 1.0);
  }
}

TEST(TTest, IncompleteBetaKnownValues) {
  EXPECT_NEAR(incomplete_beta(1, 1, 0.3), 0.3, 1e-14);
  EXPECT_NEAR(incomplete_beta(2, 3, 0.4), 0.5248, 1e-12);
  EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
  // Two-sided p of t = 2.228 with 10 degrees of freedom is 0.05.
  EXPECT_NEAR(student_t_two_sided_p(2.228138851986274, 10), 0.05, 1e-9);
}
