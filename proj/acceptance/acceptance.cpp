// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unistd.h>

#include "bbgi/automata/lstar.hpp"
#include "bbgi/eval/eval.hpp"
#include "bbgi/grammar/grammar_file.hpp"
#include "bbgi/lexinf/lexinf.hpp"
#include "bbgi/oracle/reference_languages.hpp"
#include "bbgi/syninf/syninf.hpp"
#include "commands.hpp"

using namespace bbgi;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Check {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Sample classes(const Lexicon& lex, const std::string& text) {
  Sample s;
  for (const auto& t : lex.tokenize(text).tokens) s.push_back(t.cls);
  return s;
}

std::vector<std::string> names_of(const Lexicon& lex) {
  std::vector<std::string> out;
  for (const auto& c : lex.classes) out.push_back(c.name);
  return out;
}

SynContext ctx(const Lexicon& lex, const std::string& p, const std::string& q) {
  return {classes(lex, p), classes(lex, q)};
}

// 1. Worked example.
Check worked_example() {
  auto t0 = Clock::now();
  auto lang = tinyc_language();
  auto oracle = make_reference_oracle(lang);
  const auto& lex = lang.lexicon;
  const auto render = Renderer::canonical(lex);
  std::vector<Sample> ex;
  for (const char* s : {";", "a;", "(a);"}) ex.push_back(classes(lex, s));
  auto m = build_matrix(ex, *oracle, render);

  const std::vector<std::string> rows = {";", "a", "a;", "(a)", "(a);"};
  const std::vector<SynContext> cols = {ctx(lex, "", ""), ctx(lex, "", ";"), ctx(lex, "(", ");"),
                                        ctx(lex, "a", ""), ctx(lex, "(a)", "")};
  const std::vector<std::string> expected = {"10011", "01100", "10000", "01100", "10000"};
  std::size_t matching = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      auto r = m.row(classes(lex, rows[i]));
      auto c = m.col(cols[j]);
      matching += r && c && m.at(*r, *c) == (expected[i][j] == '1');
    }

  auto trees = flat_trees(ex);
  auto g = build_swap_graph(m, trees);
  auto find = [&](const std::string& sub, const SynContext& con) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < g.bubbles.size(); ++i)
      if (g.profiles[i].sub == std::set<Sample>{classes(lex, sub)} && g.profiles[i].con == std::set<SynContext>{con})
        return i;
    return std::nullopt;
  };
  auto b3 = find("a", ctx(lex, "(", ");"));
  auto b5 = find("a", ctx(lex, "", ";"));
  auto b7 = find("(a)", ctx(lex, "", ";"));
  bool clique = false;
  if (b3 && b5 && b7) {
    std::vector<std::size_t> want = {*b3, *b5, *b7};
    std::sort(want.begin(), want.end());
    auto cl = maximal_cliques(g);
    clique = std::find(cl.cliques.begin(), cl.cliques.end(), want) != cl.cliques.end();
  }

  auto report = select_and_merge(g, trees, lex.classes.size(), 1);
  bool shape = report.outcome == MergeOutcome::Merged && report.clique.size() == 3;
  if (shape) {
    const auto n = report.nonterminal;
    const auto& t1 = trees[1].root;
    const auto& t2 = trees[2].root;
    shape = trees[0].root.children.size() == 1 && t1.children.size() == 2 && !t1.children[0].terminal &&
            t1.children[0].id == n && t2.children.size() == 2 && !t2.children[0].terminal &&
            t2.children[0].id == n && t2.children[0].children.size() == 3 &&
            !t2.children[0].children[1].terminal && t2.children[0].children[1].id == n;
    auto profiles = nonterminal_profiles(trees);
    shape = shape && profiles.at(n).sub == std::set<Sample>{classes(lex, "a"), classes(lex, "(a)")};
  }
  const double secs = since(t0);
  Check v;
  v.pass = matching == 25 && clique && shape && secs < 1.0;
  v.detail = "matrix " + std::to_string(matching) + "/25 cells, clique {3,5,7} " + (clique ? "found" : "missing") +
             ", merged trees " + (shape ? "match" : "differ") + ", " + fmt("%.3f s", secs);
  return v;
}

struct RunStats {
  std::size_t merges = 0;
  std::size_t swap_violations = 0;
  std::size_t swap_checked = 0;
  std::size_t query_drift = 0;
};

/// Per-merge swap-correctness and query-count checks for one inference run.
SynInferOptions checked_options(Oracle& oracle, Oracle& checker, const Renderer& render, RunStats& st,
                                std::optional<std::size_t>& round_queries) {
  SynInferOptions opts;
  opts.on_round = [&round_queries](const std::vector<Sample>&) { round_queries.reset(); };
  opts.on_merge = [&oracle, &checker, &render, &st, &round_queries](const MergeEvent& e) {
    ++st.merges;
    const auto q = oracle.stats().total_queries;
    if (round_queries && *round_queries != q) ++st.query_drift;
    round_queries = q;
    for (const auto& [x, p] : nonterminal_profiles(e.trees))
      for (const auto& s : p.sub)
        for (const auto& c : p.con) {
          ++st.swap_checked;
          auto r = e.matrix.row(s);
          auto k = e.matrix.col(c);
          const bool ok = r && k ? e.matrix.at(*r, *k) : checker.query(render(fill(c, s)));
          st.swap_violations += !ok;
        }
  };
  return opts;
}

struct EndToEnd {
  double recall = 0.0;
  std::optional<double> precision;
  double seconds = 0.0;
  RunStats stats;
};

EndToEnd end_to_end(const std::string& language, std::size_t n, std::uint64_t seed) {
  auto lang = builtin_language(language);
  auto oracle = make_reference_oracle(lang);
  auto checker = make_reference_oracle(lang);
  const auto opts = default_generate_options(language);
  auto train = generate_corpus(lang, n, seed, opts);
  auto tests = generate_corpus(lang, 500, seed + 999, opts);

  EndToEnd out;
  auto t0 = Clock::now();
  auto lex = infer_lexicon(train, *oracle, seed);
  const auto render = Renderer::canonical(lex.lexicon);
  std::optional<std::size_t> round_queries;
  auto syn = infer_grammar(train, lex.lexicon, *oracle, seed,
                           checked_options(*oracle, *checker, render, out.stats, round_queries));
  out.seconds = since(t0);
  out.recall = recall(syn.grammar, lex.lexicon, tests).value;
  out.precision = swap_precision(syn.grammar, lex.lexicon, tests, *oracle, seed).value;
  return out;
}

// 2, 3 and 6 share the end-to-end runs.
struct Benchmarks {
  Check swap_correct, zero_oracle, quality;
};

Benchmarks benchmarks() {
  Benchmarks b;
  std::size_t merges = 0, violations = 0, checked = 0, drift = 0;
  std::ostringstream quality;
  bool quality_ok = true;
  for (const std::string lang : {"tinyc", "json", "parens"}) {
    double r_sum = 0, p_sum = 0, worst = 0;
    const int seeds = 10;
    for (int s = 1; s <= seeds; ++s) {
      auto e = end_to_end(lang, 40, static_cast<std::uint64_t>(s));
      r_sum += e.recall;
      p_sum += e.precision.value_or(0.0);
      worst = std::max(worst, e.seconds);
      merges += e.stats.merges;
      violations += e.stats.swap_violations;
      checked += e.stats.swap_checked;
      drift += e.stats.query_drift;
    }
    if (lang == "parens") continue;
    const double r = r_sum / seeds, p = p_sum / seeds;
    quality_ok = quality_ok && r >= 0.95 && p >= 0.90 && worst <= 600;
    quality << lang << " r=" << fmt("%.3f", r) << " p=" << fmt("%.3f", p) << " max " << fmt("%.1f s", worst)
            << "; ";
  }
  b.swap_correct = {violations == 0 && merges > 0,
                    std::to_string(violations) + " rejected of " + std::to_string(checked) +
                        " Sub x Con strings over " + std::to_string(merges) + " merges (tinyc, json, parens)"};
  b.zero_oracle = {drift == 0 && merges > 0, std::to_string(drift) + " query-count changes across merge loops"};
  b.quality = {quality_ok, quality.str() + "10 seeds, 40 training, 500 test"};
  return b;
}

// 4. Lexical walkthrough.
Check lexical_walkthrough() {
  const std::string ex = "if(a); else b=c+d+e;";
  auto lang = tinyc_language();
  auto oracle = make_reference_oracle(lang);
  auto ins = discover_insensitive({ex}, *oracle);
  auto segs = refine_boundaries(ex, {ins}, *oracle);
  const std::vector<std::string> want = {"if", "(", "a", ")", ";", "else", "b", "=", "c", "+", "d", "+", "e", ";"};
  auto res = infer_lexicon({ex}, *oracle, 1);
  std::size_t len = 0;
  bool swap = false;
  if (!res.counterexamples.empty()) {
    const auto& c = res.counterexamples.front();
    len = c.sample.size();
    swap = (c.sample[c.position] == "+" && c.substitute == "=") || (c.sample[c.position] == "=" && c.substitute == "+");
  }
  auto plus = res.lexicon.tokenize("+"), eq = res.lexicon.tokenize("=");
  const bool split = plus.ok() && eq.ok() && plus.tokens[0].cls != eq.tokens[0].cls;
  Check v;
  v.pass = segs == want && swap && len <= 6 && split;
  v.detail = std::to_string(segs.size()) + " tokens " + (segs == want ? "match" : "differ") +
             ", counterexample " + std::to_string(len) + " tokens" + (swap ? " (+/= swap)" : "") +
             (split ? ", + and = separated" : "");
  return v;
}

std::vector<std::string> strings_over(const ByteSet& cs, std::size_t max_len) {
  std::vector<std::string> out, layer{""};
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

// 5. L* against brute-force membership.
Check lstar_agreement() {
  auto lang = tinyc_language();
  struct Case {
    const char* name;
    std::vector<LexContext> contexts;
    std::vector<std::string> seeds;
  };
  const std::vector<LexContext> id_ctx = {{{}, {";"}}, {{"b", "="}, {";"}}};
  const std::vector<LexContext> kw_ctx = {{{}, {"(", "a", ")", ";"}}, {{}, {"(", "a", ")", ";", "else", ";"}}};
  const std::vector<Case> cases = {{"letters", id_ctx, {"b", "c"}},
                                   {"digits", id_ctx, {"12", "7"}},
                                   {"while", kw_ctx, {"while"}},
                                   {"if", kw_ctx, {"if"}}};
  Check v;
  for (const auto& c : cases) {
    auto t0 = Clock::now();
    auto learn_oracle = make_reference_oracle(lang);
    TokenOracle g(*learn_oracle, c.contexts, c.seeds, ' ');
    auto res = learn_token_dfa(g, 7);
    auto brute_oracle = make_reference_oracle(lang);
    TokenOracle brute(*brute_oracle, c.contexts, c.seeds, ' ');
    auto words = strings_over(res.dfa.charset(), 3);
    auto truth = brute.members(words);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < words.size(); ++i) agree += truth[i] == res.dfa.accepts(words[i]);
    const double secs = since(t0);
    v.pass = v.pass && agree == words.size() && secs < 10.0;
    v.detail += std::string(c.name) + " " + std::to_string(agree) + "/" + std::to_string(words.size()) + " " +
                fmt("%.1f s", secs) + "; ";
  }
  return v;
}

// 7. Overfit fixture.
Check metric_bias() {
  auto t0 = Clock::now();
  Check v;
  for (const std::string name : {"tinyc", "json", "parens"}) {
    auto lang = builtin_language(name);
    auto oracle = make_reference_oracle(lang);
    const auto opts = default_generate_options(name);
    auto train = generate_corpus(lang, 40, 1, opts);
    auto tests = generate_corpus(lang, 500, 1000, opts);
    std::vector<Sample> ex;
    for (const auto& t : train) ex.push_back(classes(lang.lexicon, t));
    auto fixture = build_overfit_fixture(ex, names_of(lang.lexicon));
    const double sp = sampling_precision(fixture, lang.lexicon, *oracle, 3);
    const double r = recall(fixture, lang.lexicon, tests).value;
    const double p = swap_precision(fixture, lang.lexicon, tests, *oracle, 3).value.value_or(1.0);
    v.pass = v.pass && sp >= 0.99 && r >= 0.99 && p <= 0.30;
    v.detail += name + " " + fmt("%.3f", sp) + "/" + fmt("%.3f", r) + "/" + fmt("%.3f", p) + "; ";
  }
  const double secs = since(t0);
  v.pass = v.pass && secs <= 120;
  v.detail += "sampling/recall/swap, " + fmt("%.1f s", secs);
  return v;
}

// 8. Swap-precision protocol.
Check swap_protocol() {
  auto lang = tinyc_language();
  const auto& lex = lang.lexicon;
  std::vector<Sample> ex;
  for (const char* t : {"a=b;", "(a);", "if(a);"}) ex.push_back(classes(lex, t));
  auto fixture = build_overfit_fixture(ex, names_of(lex));
  const std::vector<std::string> small_tests = {"a=b;", "x=1;", "(b);"};

  // Independent enumeration of S from parse trees.
  std::map<std::uint32_t, std::set<std::vector<std::string>>> subs;
  std::map<std::uint32_t, std::set<std::pair<std::vector<std::string>, std::vector<std::string>>>> cons;
  EarleyParser parser(fixture);
  std::function<void(const ParseTree&, const std::vector<std::string>&)> walk = [&](const ParseTree& n, const auto& lx) {
    if (n.is_token()) return;
    subs[n.id].insert({lx.begin() + n.begin, lx.begin() + n.end});
    cons[n.id].insert({{lx.begin(), lx.begin() + n.begin}, {lx.begin() + n.end, lx.end()}});
    for (const auto& c : n.children) walk(c, lx);
  };
  for (const auto& t : small_tests) {
    std::vector<std::uint32_t> cls;
    std::vector<std::string> lx;
    for (const auto& tok : lex.tokenize(t).tokens) {
      cls.push_back(tok.cls);
      lx.push_back(tok.lexeme);
    }
    auto r = parser.parse(cls, kRecallTimeout, &lx);
    if (r.parsed()) walk(r.tree, lx);
  }
  std::set<std::string> s;
  for (const auto& [x, ss] : subs)
    for (const auto& sub : ss)
      for (const auto& [pre, suf] : cons[x]) {
        auto all = pre;
        all.insert(all.end(), sub.begin(), sub.end());
        all.insert(all.end(), suf.begin(), suf.end());
        s.insert(join_lexemes(all, lex.separator()));
      }
  auto fresh = make_reference_oracle(lang);
  std::size_t ok = 0;
  for (const auto& w : s) ok += fresh->query(w);
  const double exact = static_cast<double>(ok) / static_cast<double>(s.size());
  auto oracle = make_reference_oracle(lang);
  auto small = swap_precision(fixture, lex, small_tests, *oracle, 1);
  const bool exact_ok = s.size() <= 1000 && small.value && *small.value == exact && small.evaluated == s.size() &&
                        !small.sampled;

  auto tests = generate_corpus(lang, 200, 8, default_generate_options("tinyc"));
  auto a = swap_precision(fixture, lex, tests, *oracle, 42);
  auto b = swap_precision(fixture, lex, tests, *make_reference_oracle(lang), 42);
  const bool sampled_ok = a.sampled && a.evaluated == 1000 && b.evaluated == 1000 && a.value && b.value &&
                          *a.value == *b.value && a.accepted == b.accepted;
  Check v;
  v.pass = exact_ok && sampled_ok;
  v.detail = "|S|=" + std::to_string(s.size()) + " exact " + fmt("%.4f", exact) + " vs " +
             fmt("%.4f", small.value.value_or(-1)) + "; |S|=" + std::to_string(a.swap_set_size) + " sampled " +
             std::to_string(a.evaluated) + ", repeat " + (sampled_ok ? "identical" : "differs");
  return v;
}

// 9. Matrix edges versus direct oracle edges.
Check edge_equivalence() {
  Check v;
  std::size_t pairs = 0, agree = 0;
  for (const std::string name : {"tinyc", "json", "parens"}) {
    auto lang = builtin_language(name);
    auto oracle = make_reference_oracle(lang);
    auto direct = make_reference_oracle(lang);
    const auto render = Renderer::canonical(lang.lexicon);
    std::vector<Sample> ex;
    std::set<Sample> seen;
    for (const auto& p : generate_corpus(lang, 400, 7, default_generate_options(name))) {
      auto s = classes(lang.lexicon, p);
      if (s.size() <= 8 && seen.insert(s).second) ex.push_back(s);
      if (ex.size() == 5) break;
    }
    auto m = build_matrix(ex, *oracle, render);
    auto trees = flat_trees(ex);
    for (int step = 0; step < 4; ++step) {
      auto g = build_swap_graph(m, trees);
      for (std::size_t u = 0; u < g.bubbles.size(); ++u)
        for (std::size_t w = u + 1; w < g.bubbles.size(); ++w) {
          std::set<Sample> subs = g.profiles[u].sub;
          subs.insert(g.profiles[w].sub.begin(), g.profiles[w].sub.end());
          std::set<SynContext> cons = g.profiles[u].con;
          cons.insert(g.profiles[w].con.begin(), g.profiles[w].con.end());
          bool want = true;
          for (const auto& s : subs)
            for (const auto& c : cons) want = want && direct->query(render(fill(c, s)));
          ++pairs;
          agree += g.edge(u, w) == want;
        }
      if (select_and_merge(g, trees, lang.lexicon.classes.size(), 3).outcome == MergeOutcome::Done) break;
    }
  }
  v.pass = pairs > 0 && agree == pairs;
  v.detail = std::to_string(agree) + "/" + std::to_string(pairs) + " bubble pairs agree (tinyc, json, parens)";
  return v;
}

// 10. Two infer runs give identical grammar files.
Check determinism() {
  const fs::path root = fs::temp_directory_path() / ("bbgi_accept_" + std::to_string(::getpid()));
  Check v;
  for (const std::string name : {"tinyc", "json", "parens"}) {
    const auto dir = root / name;
    auto ex = cli::cmd_export_builtin(name, dir.string(), 30, 0, 4);
    std::string files[2];
    for (int k = 0; k < 2; ++k) {
      cli::RunConfig cfg;
      cfg.train_dir = (dir / "train").string();
      cfg.oracle.builtin = name;
      cfg.seed = 11;
      cfg.out = (dir / ("g" + std::to_string(k) + ".bbg")).string();
      auto out = cli::cmd_infer(cfg);
      if (out.code != cli::kOk) v.pass = false;
      std::ifstream in(cfg.out, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      std::ifstream rin(cfg.out + ".report.json", std::ios::binary);
      ss << rin.rdbuf();
      files[k] = ss.str();
    }
    const bool same = ex.code == cli::kOk && !files[0].empty() && files[0] == files[1];
    v.pass = v.pass && same;
    v.detail += name + (same ? " identical" : " differ") + "; ";
  }
  fs::remove_all(root);
  return v;
}

}  // namespace

int main() {
  int failed = 0;
  auto line = [&](int id, const char* title, const Check& v) {
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << id << ". " << title << ": " << v.detail << std::endl;
    failed += !v.pass;
  };
  line(1, "worked example", worked_example());
  auto bench = benchmarks();
  line(2, "first-order swap correctness", bench.swap_correct);
  line(3, "zero-oracle merging", bench.zero_oracle);
  line(4, "lexical walkthrough", lexical_walkthrough());
  line(5, "L* correctness", lstar_agreement());
  line(6, "end-to-end quality", bench.quality);
  line(7, "metric bias", metric_bias());
  line(8, "swap-precision protocol", swap_protocol());
  line(9, "swap-graph oracle equivalence", edge_equivalence());
  line(10, "determinism", determinism());
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
