#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <set>

#include "bbgi/automata/lstar.hpp"
#include "bbgi/automata/token_dfa.hpp"
#include "bbgi/oracle/reference_languages.hpp"

namespace bbgi {
namespace {

std::vector<std::string> strings_over(const ByteSet& cs, std::size_t max_len) {
  std::vector<std::string> out{""}, layer{""};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& w : layer)
      for (unsigned b = 0; b < 256; ++b)
        if (cs.test(b)) next.push_back(w + static_cast<char>(b));
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

TEST(TokenDfa, Factories) {
  auto lit = TokenDfa::literal("if");
  EXPECT_TRUE(lit.accepts("if"));
  EXPECT_FALSE(lit.accepts("i"));
  EXPECT_FALSE(lit.accepts("iff"));
  auto num = TokenDfa::plus(byte_range('0', '9'));
  EXPECT_TRUE(num.accepts("007"));
  EXPECT_FALSE(num.accepts(""));
  EXPECT_FALSE(num.accepts("1a"));
  auto id = TokenDfa::one_of(byte_range('a', 'z'));
  EXPECT_TRUE(id.accepts("q"));
  EXPECT_FALSE(id.accepts("qq"));
}

TEST(TokenDfa, LongestMatchAndShortest) {
  auto num = TokenDfa::plus(byte_range('0', '9'));
  EXPECT_EQ(num.longest_match("ab123;", 2), 3);
  EXPECT_EQ(num.longest_match("ab123;", 0), -1);
  EXPECT_EQ(num.shortest_accepted(), "0");
  EXPECT_EQ(TokenDfa::literal("while").shortest_accepted(), "while");
  EXPECT_TRUE(TokenDfa().empty_language());
}

TEST(TokenDfa, CanonicalIdentifiesEqualLanguages) {
  // Two-state loop for [0-9]+ written redundantly.
  TokenDfa d;
  int a = d.add_state(true);
  int b = d.add_state(true);
  d.set_range(d.start(), byte_range('0', '9'), a);
  d.set_range(a, byte_range('0', '9'), b);
  d.set_range(b, byte_range('0', '9'), a);
  d.set_charset(byte_range('0', '9'));
  auto ref = TokenDfa::plus(byte_range('0', '9'));
  ref.set_charset(byte_range('0', '9'));
  EXPECT_EQ(d.canonical(), ref.canonical());
  EXPECT_EQ(d.canonical().state_count(), 2u);
  EXPECT_NE(d.canonical(), TokenDfa::literal("0").canonical());
}

TEST(TokenDfaProperty, SamplesAreAccepted) {
  std::mt19937_64 rng(2);
  std::vector<TokenDfa> dfas{TokenDfa::literal("else"), TokenDfa::plus(byte_range('a', 'c')),
                             TokenDfa::one_of(byte_range('0', '9'))};
  for (const auto& d : dfas)
    for (int i = 0; i < 500; ++i) {
      auto s = d.sample(rng);
      EXPECT_TRUE(d.accepts(s)) << s;
      EXPECT_LE(s.size(), 32u + d.state_count());
    }
}

TEST(TokenDfaProperty, CanonicalPreservesLanguage) {
  std::mt19937_64 rng(8);
  const ByteSet cs = bytes_of("ab");
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    TokenDfa d;
    for (int q = 0; q < 4; ++q) d.add_state(coin(rng));
    std::uniform_int_distribution<int> target(-1, 4);
    for (int q = 0; q < 5; ++q)
      for (unsigned char c : std::string("ab")) {
        int t = target(rng);
        if (t >= 0) d.set_transition(q, c, t);
      }
    d.set_accepting(0, coin(rng));
    auto m = d.canonical();
    EXPECT_LE(m.state_count(), d.state_count());
    for (const auto& w : strings_over(cs, 6)) EXPECT_EQ(m.accepts(w), d.accepts(w)) << w;
    EXPECT_EQ(m.canonical(), m);
  }
}

class TinycTokens : public ::testing::Test {
 protected:
  ReferenceLanguage lang = tinyc_language();
  std::unique_ptr<Oracle> oracle = make_reference_oracle(lang);
  std::vector<LexContext> id_contexts{{{}, {";"}}, {{"b", "="}, {";"}}};
};

TEST_F(TinycTokens, FillSeparatesAlphanumerics) {
  EXPECT_EQ(fill({{"else"}, {";"}}, "b", ' '), "else b;");
  EXPECT_EQ(fill({{"("}, {")"}}, "b", ' '), "(b)");
  EXPECT_EQ(fill({{"else"}, {}}, "b", 0), "elseb");
}

TEST_F(TinycTokens, Membership) {
  EXPECT_TRUE(token_membership(*oracle, "d", id_contexts, {"b", "c"}, ' '));
  EXPECT_FALSE(token_membership(*oracle, ";", id_contexts, {"b", "c"}, ' '));
  EXPECT_TRUE(token_membership(*oracle, "b", id_contexts, {"b", "c"}, ' '));
  EXPECT_FALSE(token_membership(*oracle, "", id_contexts, {"b", "c"}, ' '));
}

TEST_F(TinycTokens, EquivalenceOnExactSeeds) {
  TokenOracle g(*oracle, {{{}, {}}}, {";"}, ' ');
  auto hyp = TokenDfa::literal(";");
  EXPECT_TRUE(approx_equivalence(hyp, g, 200, 1).equivalent);
}

TEST_F(TinycTokens, EquivalenceFindsOvergeneralization) {
  TokenOracle g(*oracle, id_contexts, {"b", "c"}, ' ');
  auto hyp = TokenDfa::plus(byte_range('a', 'z'));
  auto eq = approx_equivalence(hyp, g, 200, 1);
  ASSERT_FALSE(eq.equivalent);
  EXPECT_GE(eq.counterexample.size(), 2u);
  EXPECT_FALSE(g.member(eq.counterexample));
}

TEST_F(TinycTokens, EquivalenceChecksSeedInclusion) {
  TokenOracle g(*oracle, id_contexts, {"b", "c"}, ' ');
  auto eq = approx_equivalence(TokenDfa::literal("b"), g, 200, 1);
  ASSERT_FALSE(eq.equivalent);
  EXPECT_EQ(eq.counterexample, "c");
}

TEST(Charset, LettersDigitsAndSeedBytes) {
  auto cs = token_charset({"b", "7", "<"});
  EXPECT_TRUE(cs.test('Z'));
  EXPECT_TRUE(cs.test('0'));
  EXPECT_TRUE(cs.test('<'));
  EXPECT_FALSE(cs.test(';'));
  EXPECT_EQ(token_charset({";"}).count(), 1u);
}

// Learned DFA versus brute-force G on every string up to max_len.
void expect_brute_force_agreement(TokenOracle& g, const TokenDfa& dfa, std::size_t max_len) {
  const auto words = strings_over(dfa.charset(), max_len);
  const auto verdicts = g.members(words);
  std::size_t disagreements = 0;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (verdicts[i] != dfa.accepts(words[i])) ++disagreements;
  EXPECT_EQ(disagreements, 0u);
}

TEST_F(TinycTokens, LearnsSingleLetterIdentifiers) {
  TokenOracle g(*oracle, id_contexts, {"b", "c"}, ' ');
  auto res = learn_token_dfa(g, 7);
  EXPECT_TRUE(res.final);
  EXPECT_TRUE(res.dfa.accepts("b"));
  EXPECT_TRUE(res.dfa.accepts("z"));
  EXPECT_FALSE(res.dfa.accepts("bc"));
  expect_brute_force_agreement(g, res.dfa, 2);
}

TEST_F(TinycTokens, LearnsSingletonPunctuation) {
  TokenOracle g(*oracle, {{{}, {}}, {{"{"}, {"}"}}}, {";"}, ' ');
  auto res = learn_token_dfa(g, 7);
  EXPECT_EQ(res.dfa, TokenDfa::literal(";").canonical());
  EXPECT_EQ(res.dfa.charset().count(), 1u);
}

TEST_F(TinycTokens, LearnsNumbers) {
  TokenOracle g(*oracle, id_contexts, {"12", "7"}, ' ');
  auto res = learn_token_dfa(g, 7);
  EXPECT_TRUE(res.final);
  EXPECT_TRUE(res.dfa.accepts("905"));
  EXPECT_FALSE(res.dfa.accepts(""));
  expect_brute_force_agreement(g, res.dfa, 3);
}

TEST_F(TinycTokens, LearnsKeyword) {
  // The else context separates while from if.
  TokenOracle g(*oracle, {{{}, {"(", "a", ")", ";"}}, {{}, {"(", "a", ")", ";", "else", ";"}}}, {"while"},
                ' ');
  auto res = learn_token_dfa(g, 7);
  EXPECT_TRUE(res.dfa.accepts("while"));
  EXPECT_FALSE(res.dfa.accepts("whil"));
  expect_brute_force_agreement(g, res.dfa, 3);
}

TEST_F(TinycTokens, LearningIsDeterministicAndAgreesWithQueries) {
  TokenOracle g1(*oracle, id_contexts, {"12", "7"}, ' ');
  TokenOracle g2(*oracle, id_contexts, {"12", "7"}, ' ');
  auto a = learn_token_dfa(g1, 99);
  auto b = learn_token_dfa(g2, 99);
  EXPECT_EQ(a.dfa, b.dfa);
  for (const auto& s : g1.seeds()) EXPECT_TRUE(a.dfa.accepts(s));
  for (const auto& [w, v] : g1.answers()) EXPECT_EQ(a.dfa.accepts(w), v) << w;
}

TEST_F(TinycTokens, RoundCapFlagsNonFinal) {
  TokenOracle g(*oracle, {{{}, {"(", "a", ")", ";"}}}, {"while"}, ' ');
  LearnOptions opt;
  opt.max_rounds = 0;
  auto res = learn_token_dfa(g, 7, opt);
  EXPECT_FALSE(res.final);
  EXPECT_EQ(res.rounds, 0u);
}

TEST(ObservationTableProperty, ClosedConsistentAndMinimal) {
  // Target languages over {a,b} given by membership predicates.
  std::vector<std::function<bool(const std::string&)>> targets{
      [](const std::string& w) { return !w.empty() && w.size() % 3 == 0; },
      [](const std::string& w) { return w.find("ab") != std::string::npos; },
      [](const std::string& w) { return w == "ba" || w == "b"; },
  };
  for (const auto& target : targets) {
    ObservationTable t({'a', 'b'}, [&](const std::vector<std::string>& ws) {
      std::vector<bool> v;
      for (const auto& w : ws) v.push_back(target(w));
      return v;
    });
    TokenDfa hyp;
    for (int round = 0; round < 20; ++round) {
      t.complete();
      EXPECT_TRUE(t.closed());
      EXPECT_TRUE(t.consistent());
      hyp = t.hypothesis(bytes_of("ab"));
      std::optional<std::string> cex;
      for (const auto& w : strings_over(bytes_of("ab"), 7))
        if (hyp.accepts(w) != target(w)) {
          cex = w;
          break;
        }
      if (!cex) break;
      t.add_counterexample(*cex);
    }
    for (const auto& s : t.prefixes())
      for (const auto& e : t.suffixes()) EXPECT_EQ(hyp.accepts(s + e), t.value(s + e));
    const auto minimal = hyp.canonical();
    EXPECT_LE(hyp.state_count() - minimal.state_count(), 1u);
  }
}

}  // namespace
}  // namespace bbgi
