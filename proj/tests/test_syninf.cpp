#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <set>

#include "bbgi/grammar/earley.hpp"
#include "bbgi/oracle/reference_languages.hpp"
#include "bbgi/syninf/syninf.hpp"
#include "test_support.hpp"

namespace bbgi {
namespace {

struct Lang {
  ReferenceLanguage lang;
  std::unique_ptr<Oracle> oracle;
  Renderer render;
  std::vector<std::string> names;

  explicit Lang(const std::string& name)
      : lang(builtin_language(name)), oracle(make_reference_oracle(lang)),
        render(Renderer::canonical(lang.lexicon)) {
    for (const auto& c : lang.lexicon.classes) names.push_back(c.name);
  }

  Sample enc(const std::string& text) const {
    auto tk = lang.lexicon.tokenize(text);
    EXPECT_TRUE(tk.ok()) << text;
    Sample s;
    for (const auto& t : tk.tokens) s.push_back(t.cls);
    return s;
  }

  std::vector<Sample> enc_all(const std::vector<std::string>& texts) const {
    std::vector<Sample> out;
    for (const auto& t : texts) out.push_back(enc(t));
    return out;
  }

  SynContext ctx(const std::string& prefix, const std::string& suffix) const {
    return {enc(prefix), enc(suffix)};
  }
};

const std::vector<std::string> kRunning = {";", "a;", "(a);"};

std::optional<std::size_t> find_bubble(const SwapGraph& g, const Sample& sub, const SynContext& con) {
  for (std::size_t i = 0; i < g.bubbles.size(); ++i)
    if (g.profiles[i].sub == std::set<Sample>{sub} && g.profiles[i].con == std::set<SynContext>{con}) return i;
  return std::nullopt;
}

/// Swappability of two bubbles decided by fresh oracle queries.
bool direct_edge(const SwapGraph& g, std::size_t u, std::size_t v, Oracle& oracle, const Renderer& render) {
  if (u == v) return false;
  std::set<Sample> subs = g.profiles[u].sub;
  subs.insert(g.profiles[v].sub.begin(), g.profiles[v].sub.end());
  std::set<SynContext> cons = g.profiles[u].con;
  cons.insert(g.profiles[v].con.begin(), g.profiles[v].con.end());
  for (const auto& s : subs)
    for (const auto& c : cons)
      if (!oracle.query(render(fill(c, s)))) return false;
  return true;
}

std::string dump(const SynNode& n) {
  if (n.terminal) return "t" + std::to_string(n.id);
  std::string out = (n.id == kStartSymbol ? "S" : "N") + std::string("(");
  for (std::size_t i = 0; i < n.children.size(); ++i) out += (i ? " " : "") + dump(n.children[i]);
  return out + ")";
}

TEST(Matrix, RunningExampleSubmatrix) {
  Lang l("tinyc");
  auto t0 = std::chrono::steady_clock::now();
  auto m = build_matrix(l.enc_all(kRunning), *l.oracle, l.render);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);

  const std::vector<std::string> rows = {";", "a", "a;", "(a)", "(a);"};
  const std::vector<SynContext> cols = {l.ctx("", ""), l.ctx("", ";"), l.ctx("(", ");"), l.ctx("a", ""),
                                        l.ctx("(a)", "")};
  const std::vector<std::string> expected = {"10011", "01100", "10000", "01100", "10000"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = m.row(l.enc(rows[i]));
    ASSERT_TRUE(r) << rows[i];
    for (std::size_t j = 0; j < cols.size(); ++j) {
      auto c = m.col(cols[j]);
      ASSERT_TRUE(c) << j;
      EXPECT_EQ(m.at(*r, *c), expected[i][j] == '1') << rows[i] << " col " << j;
    }
  }
  EXPECT_TRUE(m.lookup(l.enc(";"), l.ctx("a", "")));
  EXPECT_FALSE(m.lookup(l.enc("a"), l.ctx("", "")));
}

TEST(Matrix, SingleTokenExample) {
  Lang l("tinyc");
  auto m = build_matrix({l.enc(";")}, *l.oracle, l.render);
  ASSERT_EQ(m.row_count(), 1u);
  ASSERT_EQ(m.col_count(), 1u);
  EXPECT_TRUE(m.at(0, 0));
}

TEST(Matrix, CellsEqualDirectQueries) {
  Lang l("tinyc");
  auto m = build_matrix(l.enc_all({";", "a;"}), *l.oracle, l.render);
  EXPECT_EQ(m.row_count(), 3u);
  EXPECT_EQ(m.col_count(), 3u);
  auto fresh = make_reference_oracle(l.lang);
  for (std::size_t r = 0; r < m.row_count(); ++r)
    for (std::size_t c = 0; c < m.col_count(); ++c)
      EXPECT_EQ(m.at(r, c), fresh->query(l.render(fill(m.cols()[c], m.rows()[r]))));
}

TEST(Matrix, RowsAndColumnsEnumerated) {
  Lang l("tinyc");
  auto ex = l.enc_all({"a=b;", "(a);"});
  auto m = build_matrix(ex, *l.oracle, l.render);
  std::set<Sample> subs;
  std::set<SynContext> cons;
  for (const auto& e : ex)
    for (std::size_t i = 0; i < e.size(); ++i)
      for (std::size_t j = i + 1; j <= e.size(); ++j) {
        subs.insert(Sample(e.begin() + i, e.begin() + j));
        cons.insert({Sample(e.begin(), e.begin() + i), Sample(e.begin() + j, e.end())});
      }
  EXPECT_EQ(std::set<Sample>(m.rows().begin(), m.rows().end()), subs);
  EXPECT_EQ(std::set<SynContext>(m.cols().begin(), m.cols().end()), cons);
  EXPECT_FALSE(m.lookup(l.enc("while"), l.ctx("", "")));
}

TEST(FlatTrees, Shape) {
  Lang l("tinyc");
  auto t = flat_tree(l.enc(";"));
  EXPECT_EQ(t.root.id, kStartSymbol);
  ASSERT_EQ(t.root.children.size(), 1u);
  EXPECT_TRUE(t.root.children[0].terminal);

  auto s = l.enc("(a);");
  auto f = flat_tree(s);
  ASSERT_EQ(f.root.children.size(), 4u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_TRUE(f.root.children[i].terminal);
    EXPECT_EQ(f.root.children[i].id, s[i]);
    EXPECT_EQ(f.root.children[i].begin, i);
    EXPECT_EQ(f.root.children[i].end, i + 1);
  }
  for (const auto& text : {"if(a); else b=c+d+e;", "{a=1;}", "while(x<3)x=x+1;"}) {
    auto tree = flat_tree(l.enc(text));
    EXPECT_EQ(tree.root.children.size(), l.enc(text).size());
  }
}

class Running : public ::testing::Test {
 protected:
  Lang l{"tinyc"};
  std::vector<Sample> ex = l.enc_all(kRunning);
  DistributionalMatrix m = build_matrix(ex, *l.oracle, l.render);
  std::vector<SynTree> trees = flat_trees(ex);
  SwapGraph g = build_swap_graph(m, trees);
};

TEST_F(Running, BubbleTable) {
  // Every flat-tree bubble has a singleton profile.
  for (const auto& p : g.profiles) {
    EXPECT_EQ(p.sub.size(), 1u);
    EXPECT_EQ(p.con.size(), 1u);
  }
  EXPECT_EQ(g.bubbles.size(), 1u + 3u + 10u);
  auto b3 = find_bubble(g, l.enc("a"), l.ctx("(", ");"));
  auto b8 = find_bubble(g, l.enc("(a);"), l.ctx("", ""));
  ASSERT_TRUE(b3);
  ASSERT_TRUE(b8);
  auto p3 = bubble_profile(trees, g.bubbles[*b3]);
  EXPECT_EQ(p3.sub, std::set<Sample>{l.enc("a")});
  EXPECT_EQ(p3.con, std::set<SynContext>{l.ctx("(", ");")});
  auto p8 = bubble_profile(trees, g.bubbles[*b8]);
  EXPECT_EQ(p8.sub, std::set<Sample>{l.enc("(a);")});
  EXPECT_EQ(p8.con, std::set<SynContext>{l.ctx("", "")});
}

TEST_F(Running, CliqueOverIdentifierAndParenthesized) {
  auto a_paren = find_bubble(g, l.enc("a"), l.ctx("(", ");"));
  auto a_semi = find_bubble(g, l.enc("a"), l.ctx("", ";"));
  auto pa_semi = find_bubble(g, l.enc("(a)"), l.ctx("", ";"));
  ASSERT_TRUE(a_paren && a_semi && pa_semi);
  EXPECT_TRUE(g.edge(*a_paren, *a_semi));
  EXPECT_TRUE(g.edge(*a_paren, *pa_semi));
  EXPECT_TRUE(g.edge(*a_semi, *pa_semi));

  auto cl = maximal_cliques(g);
  EXPECT_TRUE(cl.complete);
  std::vector<std::size_t> expected = {*a_paren, *a_semi, *pa_semi};
  std::sort(expected.begin(), expected.end());
  EXPECT_NE(std::find(cl.cliques.begin(), cl.cliques.end(), expected), cl.cliques.end());
}

TEST_F(Running, MergeBuildsSharedNonterminal) {
  EarleyParser before(to_grammar(trees, l.names));
  EXPECT_FALSE(before.accepts(l.enc("((a));")));

  auto report = select_and_merge(g, trees, l.names.size(), 1);
  ASSERT_EQ(report.outcome, MergeOutcome::Merged);
  EXPECT_EQ(report.clique.size(), 3u);

  const std::string id = "t" + std::to_string(l.enc("a")[0]);
  const std::string lp = "t" + std::to_string(l.enc("(")[0]);
  const std::string rp = "t" + std::to_string(l.enc(")")[0]);
  const std::string sc = "t" + std::to_string(l.enc(";")[0]);
  EXPECT_EQ(dump(trees[0].root), "S(" + sc + ")");
  EXPECT_EQ(dump(trees[1].root), "S(N(" + id + ") " + sc + ")");
  EXPECT_EQ(dump(trees[2].root), "S(N(" + lp + " N(" + id + ") " + rp + ") " + sc + ")");
  EXPECT_EQ(trees[1].root.children[0].id, report.nonterminal);
  EXPECT_EQ(trees[2].root.children[0].children[1].id, report.nonterminal);

  Grammar after = to_grammar(trees, l.names);
  EXPECT_EQ(after.nonterminals.size(), 2u);
  EXPECT_EQ(after.rules.size(), 4u);
  EXPECT_TRUE(EarleyParser(after).accepts(l.enc("((a));")));

  // The shared nonterminal's profile is the union of the three merged bubbles.
  auto profiles = nonterminal_profiles(trees);
  const auto& n = profiles.at(report.nonterminal);
  EXPECT_EQ(n.sub, (std::set<Sample>{l.enc("a"), l.enc("(a)")}));
  EXPECT_EQ(n.con, (std::set<SynContext>{l.ctx("", ";"), l.ctx("(", ");")}));
  auto g2 = build_swap_graph(m, trees);
  bool found = false;
  for (std::size_t i = 0; i < g2.bubbles.size(); ++i)
    if (bubble_nonterminal(trees, g2.bubbles[i]) == report.nonterminal) {
      found = true;
      EXPECT_EQ(g2.profiles[i].sub, n.sub);
      EXPECT_EQ(g2.profiles[i].con, n.con);
    }
  EXPECT_TRUE(found);
}

TEST_F(Running, GeneralizeMatchesFigureGrammar) {
  auto res = generalize(ex, *l.oracle, l.render, l.names, 1);
  EXPECT_EQ(res.training_parsed, ex.size());

  Grammar fig;
  fig.terminals = l.names;
  auto s = fig.add_nonterminal("start");
  auto n = fig.add_nonterminal("n");
  fig.start = s;
  const auto id = l.enc("a")[0], lp = l.enc("(")[0], rp = l.enc(")")[0], sc = l.enc(";")[0];
  fig.add_rule(s, {Symbol::t(sc)});
  fig.add_rule(s, {Symbol::nt(n), Symbol::t(sc)});
  fig.add_rule(n, {Symbol::t(id)});
  fig.add_rule(n, {Symbol::t(lp), Symbol::nt(n), Symbol::t(rp)});
  EXPECT_EQ(testing::enumerate_language(res.grammar, 6), testing::enumerate_language(fig, 6));
}

TEST(SwapGraph, SingleBubbleHasNoEdges) {
  Lang l("tinyc");
  auto ex = l.enc_all({";"});
  auto trees = flat_trees(ex);
  auto g = build_swap_graph(build_matrix(ex, *l.oracle, l.render), trees);
  EXPECT_EQ(g.bubbles.size(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_EQ(select_and_merge(g, trees, l.names.size(), 1).outcome, MergeOutcome::Done);
}

TEST(SwapGraph, NoEdgesMeansDone) {
  Lang l("tinyc");
  auto ex = l.enc_all({"a=b;"});
  auto trees = flat_trees(ex);
  auto g = build_swap_graph(build_matrix(ex, *l.oracle, l.render), trees);
  if (g.edge_count() == 0) EXPECT_EQ(select_and_merge(g, trees, l.names.size(), 1).outcome, MergeOutcome::Done);
  auto before = trees;
  auto r = select_and_merge(g, trees, l.names.size(), 1);
  if (r.outcome == MergeOutcome::Done) EXPECT_EQ(dump(trees[0].root), dump(before[0].root));
}

/// Up to `count` distinct programs of at most `max_tokens` tokens.
std::vector<Sample> short_corpus(const Lang& l, std::size_t count, std::size_t max_tokens, std::uint64_t seed) {
  std::vector<Sample> out;
  std::set<Sample> seen;
  for (const auto& p : generate_corpus(l.lang, 400, seed, default_generate_options(l.lang.name))) {
    auto s = l.enc(p);
    if (s.size() <= max_tokens && seen.insert(s).second) out.push_back(s);
    if (out.size() == count) break;
  }
  return out;
}

class PerLanguage : public ::testing::TestWithParam<std::string> {};

TEST_P(PerLanguage, MatrixEdgesEqualDirectEdges) {
  Lang l(GetParam());
  auto ex = short_corpus(l, 5, 8, 7);
  ASSERT_FALSE(ex.empty());
  auto m = build_matrix(ex, *l.oracle, l.render);
  auto trees = flat_trees(ex);
  auto direct = make_reference_oracle(l.lang);
  for (int step = 0; step < 3; ++step) {
    auto g = build_swap_graph(m, trees);
    std::size_t edges = 0;
    for (std::size_t u = 0; u < g.bubbles.size(); ++u)
      for (std::size_t v = 0; v < g.bubbles.size(); ++v) {
        const bool want = direct_edge(g, u, v, *direct, l.render);
        ASSERT_EQ(g.edge(u, v), want) << "step " << step << " bubbles " << u << "," << v;
        edges += want && u < v;
      }
    EXPECT_EQ(g.edge_count(), edges);
    if (select_and_merge(g, trees, l.names.size(), 3).outcome == MergeOutcome::Done) break;
  }
}

TEST_P(PerLanguage, CliquesArePairwiseConnectedAndMaximal) {
  Lang l(GetParam());
  auto ex = short_corpus(l, 6, 10, 11);
  auto trees = flat_trees(ex);
  auto g = build_swap_graph(build_matrix(ex, *l.oracle, l.render), trees);
  auto cl = maximal_cliques(g);
  ASSERT_FALSE(cl.cliques.empty());
  for (std::size_t k = 0; k < cl.cliques.size(); ++k) {
    const auto& c = cl.cliques[k];
    EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) ASSERT_TRUE(g.edge(c[i], c[j]));
    if (c.size() >= 2)
      for (std::size_t w = 0; w < g.bubbles.size(); ++w) {
        if (std::binary_search(c.begin(), c.end(), w)) continue;
        EXPECT_FALSE(std::all_of(c.begin(), c.end(), [&](std::size_t x) { return g.edge(x, w); }));
      }
    if (k > 0) {
      const auto& p = cl.cliques[k - 1];
      EXPECT_TRUE(p.size() > c.size() || (p.size() == c.size() && p < c));
    }
  }
}

TEST_P(PerLanguage, InferenceInvariantsHoldAfterEveryMerge) {
  Lang l(GetParam());
  auto train = generate_corpus(l.lang, 15, 5, default_generate_options(GetParam()));
  std::vector<Sample> train_tokens;
  for (const auto& t : train) train_tokens.push_back(l.enc(t));
  auto check = make_reference_oracle(l.lang);

  std::size_t merges = 0, rounds = 0, last_parsed = 0;
  std::optional<std::size_t> round_queries;
  bool swap_ok = true, zero_oracle = true, monotone = true;
  SynInferOptions opts;
  opts.on_round = [&](const std::vector<Sample>&) {
    ++rounds;
    round_queries.reset();
  };
  opts.on_merge = [&](const MergeEvent& e) {
    ++merges;
    const auto q = l.oracle->stats().total_queries;
    if (round_queries && *round_queries != q) zero_oracle = false;
    round_queries = q;
    for (const auto& [x, p] : nonterminal_profiles(e.trees))
      for (const auto& s : p.sub)
        for (const auto& c : p.con)
          if (!check->query(l.render(fill(c, s)))) swap_ok = false;
    EarleyParser parser(to_grammar(e.trees, l.names));
    std::size_t parsed = 0;
    for (const auto& t : train_tokens) parsed += parser.accepts(t);
    if (parsed < last_parsed) monotone = false;
    last_parsed = parsed;
  };
  auto res = infer_grammar(train, l.lang.lexicon, *l.oracle, 5, opts);
  EXPECT_GT(merges, 0u);
  EXPECT_GT(rounds, 0u);
  EXPECT_TRUE(swap_ok);
  EXPECT_TRUE(zero_oracle);
  EXPECT_TRUE(monotone);
  EXPECT_TRUE(res.complete);
  EXPECT_EQ(res.training_parsed, train.size());
  EarleyParser final_parser(res.grammar);
  for (const auto& t : train_tokens) EXPECT_TRUE(final_parser.accepts(t));
}

TEST_P(PerLanguage, GeneralizeQueriesOnlyTheMatrix) {
  Lang l(GetParam());
  auto ex = short_corpus(l, 8, 10, 3);
  auto a = make_reference_oracle(l.lang);
  auto b = make_reference_oracle(l.lang);
  build_matrix(ex, *a, l.render);
  auto res = generalize(ex, *b, l.render, l.names, 9);
  EXPECT_EQ(b->stats().total_queries, a->stats().total_queries);
  EXPECT_EQ(res.training_parsed, ex.size());
}

INSTANTIATE_TEST_SUITE_P(Builtin, PerLanguage, ::testing::Values("tinyc", "parens", "json"));

TEST(Infer, SingleExampleKeepsFlatRule) {
  Lang l("tinyc");
  auto res = infer_grammar({";"}, l.lang.lexicon, *l.oracle, 1);
  EXPECT_EQ(res.training_parsed, 1u);
  EXPECT_EQ(res.merges, 0u);
  EXPECT_EQ(testing::enumerate_language(res.grammar, 6), std::set<testing::Word>{l.enc(";")});

  auto flat = generalize({l.enc("{}")}, *l.oracle, l.render, l.names, 1);
  EXPECT_EQ(flat.training_parsed, 1u);
  EXPECT_EQ(testing::enumerate_language(flat.grammar, 8), std::set<testing::Word>{l.enc("{}")});
}

TEST(Infer, TinycTrainingFullyParsed) {
  Lang l("tinyc");
  auto train = generate_corpus(l.lang, 20, 2, default_generate_options("tinyc"));
  auto res = infer_grammar(train, l.lang.lexicon, *l.oracle, 2);
  EXPECT_TRUE(res.complete);
  EXPECT_EQ(res.training_parsed, train.size());
  EXPECT_GT(res.merges, 0u);
  EXPECT_GT(res.matrix_rows, 0u);
}

TEST(ToGrammar, FlatTreesGiveOneRulePerDistinctExample) {
  Lang l("tinyc");
  auto ex = l.enc_all({";", "a;", ";", "(a);"});
  auto g = to_grammar(flat_trees(ex), l.names);
  EXPECT_EQ(g.rules.size(), 3u);
  EXPECT_EQ(g.nonterminals.size(), 1u);
  EarleyParser p(g);
  for (const auto& e : ex) EXPECT_TRUE(p.accepts(e));
  EXPECT_FALSE(p.accepts(l.enc("a=b;")));
}

TEST(ToGrammar, RuleCountEqualsSignatureCount) {
  Lang l("tinyc");
  auto ex = short_corpus(l, 8, 10, 5);
  auto res = generalize(ex, *l.oracle, l.render, l.names, 4);
  std::set<std::pair<std::uint32_t, std::vector<std::pair<bool, std::uint32_t>>>> signatures;
  std::function<void(const SynNode&)> walk = [&](const SynNode& n) {
    if (n.terminal) return;
    std::vector<std::pair<bool, std::uint32_t>> rhs;
    for (const auto& c : n.children) {
      rhs.emplace_back(c.terminal, c.id);
      walk(c);
    }
    signatures.insert({n.id, rhs});
  };
  for (const auto& t : res.trees) walk(t.root);
  EXPECT_EQ(res.grammar.rules.size(), signatures.size());
}

TEST(Merge, NextNonterminalIsFresh) {
  Lang l("tinyc");
  auto trees = flat_trees(l.enc_all(kRunning));
  EXPECT_EQ(next_nonterminal(trees), kStartSymbol + 1);
}

}  // namespace
}  // namespace bbgi
