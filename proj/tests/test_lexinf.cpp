#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "bbgi/errors.hpp"
#include "bbgi/lexinf/lexinf.hpp"
#include "bbgi/oracle/reference_languages.hpp"

namespace bbgi {
namespace {

const std::string kWalkthrough = "if(a); else b=c+d+e;";

ByteSet space_only() {
  ByteSet b;
  b.set(' ');
  return b;
}

class Tinyc : public ::testing::Test {
 protected:
  ReferenceLanguage lang = tinyc_language();
  std::unique_ptr<Oracle> oracle = make_reference_oracle(lang);
};

TEST(Segment, WalkthroughExample) {
  EXPECT_EQ(segment(kWalkthrough, {space_only()}),
            (Segments{"if", "(", "a", ")", ";", "else", "b", "=", "c", "+", "d", "+", "e", ";"}));
}

TEST(Segment, EdgeCases) {
  EXPECT_TRUE(segment("", {space_only()}).empty());
  EXPECT_EQ(segment("x12", {space_only()}), Segments{"x12"});
  EXPECT_EQ(segment("a  b", {}), (Segments{"a", " ", " ", "b"}));
  EXPECT_EQ(byte_kind('_'), ByteKind::Letterlike);
  EXPECT_EQ(byte_kind('7'), ByteKind::Digit);
  EXPECT_EQ(byte_kind('\t'), ByteKind::Whitespace);
  EXPECT_EQ(byte_kind('+'), ByteKind::Punctuation);
}

TEST_F(Tinyc, SpaceIsInsensitive) {
  EXPECT_TRUE(oracle->query("if(a); else  b=c+d+e;"));
  auto ins = discover_insensitive({kWalkthrough}, *oracle);
  EXPECT_TRUE(ins.test(' '));
  EXPECT_FALSE(ins.test('\t'));
  EXPECT_EQ(ins.count(), 1u);
}

TEST_F(Tinyc, RefinementConfirmsTokenBoundaries) {
  EXPECT_TRUE(oracle->query("b=c +d;"));
  EXPECT_EQ(refine_boundaries("b=c+d;", {space_only()}, *oracle), (Segments{"b", "=", "c", "+", "d", ";"}));
  EXPECT_EQ(refine_boundaries("x12", {space_only()}, *oracle), Segments{"x12"});
  EXPECT_EQ(refine_boundaries(kWalkthrough, {space_only()}, *oracle), segment(kWalkthrough, {space_only()}));
}

TEST(Refine, RejectedBoundariesMerge) {
  auto json = make_reference_oracle(json_language());
  EXPECT_EQ(refine_boundaries("{\"ab\": 1}", {space_only()}, *json), (Segments{"{", "\"ab\"", ":", "1", "}"}));
  EXPECT_EQ(refine_boundaries("[\"\"]", {space_only()}, *json), (Segments{"[", "\"\"", "]"}));
}

TEST(Contexts, HoleAtEveryPosition) {
  auto cs = contexts_of({"b", "=", "c", ";"});
  ASSERT_EQ(cs.size(), 4u);
  EXPECT_EQ(cs[2].prefix, (Segments{"b", "="}));
  EXPECT_EQ(cs[2].suffix, Segments{";"});
}

std::vector<LexContext> contexts_for(const std::vector<Segments>& samples) {
  std::vector<LexContext> out;
  std::set<LexContext> seen;
  for (const auto& s : samples)
    for (const auto& c : contexts_of(s))
      if (seen.insert(c).second) out.push_back(c);
  return out;
}

DecisionTree build_tree(const std::vector<Segments>& samples, Oracle& oracle) {
  DecisionTree tree;
  std::vector<Segments> seen;
  for (const auto& s : samples) {
    seen.push_back(s);
    auto cs = contexts_for(seen);
    for (const auto& v : s) tree.classify(v, cs, oracle, ' ');
  }
  return tree;
}

TEST_F(Tinyc, DecisionTreeOfWalkthrough) {
  std::vector<Segments> samples{{";"}, {"c", ";"}, {"b", "=", "c", ";"}};
  auto tree = build_tree(samples, *oracle);
  EXPECT_EQ(tree.classes(), (std::vector<std::vector<std::string>>{{";"}, {"c", "b"}, {"="}}));

  samples.push_back({"b", "+", "c", ";"});
  tree = build_tree(samples, *oracle);
  EXPECT_EQ(tree.classes(), (std::vector<std::vector<std::string>>{{";"}, {"c", "b"}, {"=", "+"}}));
}

TEST_F(Tinyc, ReinsertingKnownValueKeepsShape) {
  std::vector<Segments> samples{{";"}, {"c", ";"}, {"b", "=", "c", ";"}};
  auto tree = build_tree(samples, *oracle);
  const auto before = tree.nodes().size();
  tree.classify("b", contexts_for(samples), *oracle, ' ');
  EXPECT_EQ(tree.nodes().size(), before);
  EXPECT_EQ(tree.classes().size(), 3u);
}

TEST_F(Tinyc, ParenthesesLandInDifferentLeaves) {
  auto tree = build_tree({{"a", ";"}, {"(", "a", ")", ";"}}, *oracle);
  for (const auto& cls : tree.classes()) {
    bool open = std::find(cls.begin(), cls.end(), "(") != cls.end();
    bool close = std::find(cls.begin(), cls.end(), ")") != cls.end();
    EXPECT_FALSE(open && close);
  }
}

TEST_F(Tinyc, TreeInvariants) {
  std::vector<Segments> samples{{";"}, {"c", ";"}, {"b", "=", "c", ";"}, {"b", "+", "c", ";"},
                                {"(", "a", ")", ";"}, {"if", "(", "a", ")", ";"}, {"c", "+", "d", "+", "e", ";"}};
  auto tree = build_tree(samples, *oracle);
  const auto cs = contexts_for(samples);
  // Path soundness.
  for (const auto& cls : tree.classes())
    for (const auto& v : cls)
      for (const auto& [c, right] : tree.path_of(v)) EXPECT_EQ(oracle->query(fill(c, v, ' ')), right) << v;
  // Leaf consistency under every context of C.
  for (const auto& cls : tree.classes())
    for (const auto& c : cs) {
      const bool first = oracle->query(fill(c, cls.front(), ' '));
      for (const auto& v : cls) EXPECT_EQ(oracle->query(fill(c, v, ' ')), first) << v;
    }
  // The counterexample context separates + from =.
  for (const auto& cls : tree.classes())
    EXPECT_FALSE(std::find(cls.begin(), cls.end(), "+") != cls.end() &&
                 std::find(cls.begin(), cls.end(), "=") != cls.end());
}

Lexicon merged_plus_equals_lexicon() {
  Lexicon lx;
  lx.insensitive = space_only();
  for (const char* k : {"if", "else", "(", ")", ";"}) lx.classes.push_back({k, TokenDfa::literal(k)});
  lx.classes.push_back({"id", TokenDfa::one_of(byte_range('a', 'z'))});
  lx.classes.push_back({"op", TokenDfa::one_of(bytes_of("+="))});
  return lx;
}

TEST_F(Tinyc, ValidationFindsPlusEqualsCounterexample) {
  EXPECT_TRUE(oracle->query(kWalkthrough));
  EXPECT_FALSE(oracle->query("if(a); else b=c+d=e;"));
  auto lx = merged_plus_equals_lexicon();
  auto cex = validate_lexicon(lx, DecisionTree{}, {kWalkthrough}, *oracle, 1);
  ASSERT_TRUE(cex.has_value());
  EXPECT_LE(cex->sample.size(), 6u);
  EXPECT_EQ(join_lexemes(cex->sample, ' '), "c+d+e;");
  EXPECT_EQ(cex->sample[cex->position], "+");
  EXPECT_EQ(cex->substitute, "=");
  auto swapped = cex->sample;
  swapped[cex->position] = cex->substitute;
  EXPECT_TRUE(oracle->query(join_lexemes(cex->sample, ' ')));
  EXPECT_FALSE(oracle->query(join_lexemes(swapped, ' ')));
}

TEST_F(Tinyc, ValidationAcceptsCorrectLexicon) {
  Lexicon lx = lang.lexicon;
  EXPECT_FALSE(validate_lexicon(lx, DecisionTree{}, {kWalkthrough, "while(a<1){b=b-1;}"}, *oracle, 1).has_value());
  // Identifier substitution is harmless.
  EXPECT_TRUE(oracle->query("if(a); else d=c+d+e;"));
}

std::map<std::string, std::string> class_of_segment(const Lexicon& lx, const std::vector<std::string>& corpus) {
  std::map<std::string, std::string> out;
  for (const auto& x : corpus)
    for (const auto& t : lx.tokenize(x).tokens) out[t.lexeme] = lx.classes[t.cls].name;
  return out;
}

TEST_F(Tinyc, InfersWalkthroughClasses) {
  auto res = infer_lexicon({kWalkthrough}, *oracle, 1);
  EXPECT_TRUE(res.complete);
  ASSERT_EQ(res.lexicon.classes.size(), 8u);
  auto cls = class_of_segment(res.lexicon, {kWalkthrough});
  for (const char* id : {"a", "b", "c", "d", "e"}) EXPECT_EQ(cls[id], cls["a"]);
  std::set<std::string> names;
  for (const auto& [lexeme, name] : cls) names.insert(name);
  EXPECT_EQ(names.size(), 8u);
  EXPECT_NE(cls["+"], cls["="]);
  EXPECT_TRUE(res.lexicon.classes[*res.lexicon.find(cls["a"])].dfa.accepts("q"));
  ASSERT_FALSE(res.counterexamples.empty());
  EXPECT_EQ(join_lexemes(res.counterexamples.front().sample, ' '), "c+d+e;");
}

TEST_F(Tinyc, SingleStatementCorpus) {
  auto res = infer_lexicon({";"}, *oracle, 1);
  ASSERT_EQ(res.lexicon.classes.size(), 1u);
  EXPECT_EQ(res.lexicon.classes[0].name, ";");
  EXPECT_TRUE(res.lexicon.classes[0].dfa.accepts(";"));
  EXPECT_FALSE(res.lexicon.classes[0].dfa.accepts(";;"));
}

TEST_F(Tinyc, EmptyCorpusThrows) { EXPECT_THROW(infer_lexicon({}, *oracle, 1), EmptyCorpus); }

TEST_F(Tinyc, GeneratedCorpusPartitionMatchesDistribution) {
  auto corpus = generate_corpus(lang, 40, 3, default_generate_options("tinyc"));
  auto res = infer_lexicon(corpus, *oracle, 1);
  EXPECT_TRUE(res.complete);
  // Tokenization closure.
  for (const auto& x : corpus) EXPECT_TRUE(res.lexicon.tokenize(x).ok()) << x;
  // Inferred classes equal reference classes, except that + and - share
  // every context in the grammar and so form one class.
  auto inferred = class_of_segment(res.lexicon, corpus);
  auto reference = class_of_segment(lang.lexicon, corpus);
  auto ref_class = [&](const std::string& lexeme) {
    const auto& r = reference.at(lexeme);
    return r == "-" ? std::string("+") : r;
  };
  for (const auto& [a, ca] : inferred)
    for (const auto& [b, cb] : inferred) EXPECT_EQ(ca == cb, ref_class(a) == ref_class(b)) << a << " vs " << b;
  // Character-level generalization beyond seen lexemes.
  EXPECT_TRUE(res.lexicon.classes[*res.lexicon.find(inferred.at("a"))].dfa.accepts("a"));
  for (const auto& [lexeme, name] : inferred)
    if (reference.at(lexeme) == "num") {
      EXPECT_TRUE(res.lexicon.classes[*res.lexicon.find(name)].dfa.accepts("9876543210"));
      break;
    }
}

TEST_F(Tinyc, InferenceIsDeterministic) {
  auto corpus = generate_corpus(lang, 20, 5, default_generate_options("tinyc"));
  auto o2 = make_reference_oracle(lang);
  EXPECT_EQ(infer_lexicon(corpus, *oracle, 4).lexicon, infer_lexicon(corpus, *o2, 4).lexicon);
}

TEST(LexinfJson, NumbersGeneralize) {
  auto lang = json_language();
  auto oracle = make_reference_oracle(lang);
  auto corpus = generate_corpus(lang, 40, 3, default_generate_options("json"));
  auto res = infer_lexicon(corpus, *oracle, 1);
  EXPECT_TRUE(res.complete);
  std::string number;
  for (const auto& x : corpus)
    for (const auto& t : lang.lexicon.tokenize(x).tokens)
      if (lang.lexicon.classes[t.cls].name == "number") number = t.lexeme;
  ASSERT_FALSE(number.empty());
  auto toks = res.lexicon.tokenize(number);
  ASSERT_EQ(toks.tokens.size(), 1u);
  const auto& dfa = res.lexicon.classes[toks.tokens[0].cls].dfa;
  EXPECT_TRUE(dfa.accepts("24680"));
  EXPECT_FALSE(dfa.accepts("24a"));
}

TEST_F(Tinyc, ClassSubstitutabilityInShortContexts) {
  auto corpus = generate_corpus(lang, 20, 9, default_generate_options("tinyc"));
  auto res = infer_lexicon(corpus, *oracle, 2);
  std::vector<LexContext> cs;
  std::set<LexContext> seen;
  for (const auto& s : res.short_samples)
    for (const auto& c : contexts_of(s))
      if (seen.insert(c).second) cs.push_back(c);
  for (const auto& cls : res.tree.classes())
    for (std::size_t i = 1; i < cls.size() && i < 4; ++i)
      for (const auto& c : cs) EXPECT_EQ(oracle->query(fill(c, cls[0], ' ')), oracle->query(fill(c, cls[i], ' ')));
}

}  // namespace
}  // namespace bbgi
