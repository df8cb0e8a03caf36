#include "bbgi/eval/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bbgi {

namespace {

using Lexemes = std::vector<std::string>;

void collect(const ParseTree& node, const Lexemes& lexemes, std::vector<std::set<Lexemes>>& subs,
             std::vector<std::set<std::pair<Lexemes, Lexemes>>>& cons) {
  if (node.is_token()) return;
  auto at = [&](std::size_t b, std::size_t e) {
    return Lexemes(lexemes.begin() + static_cast<std::ptrdiff_t>(b), lexemes.begin() + static_cast<std::ptrdiff_t>(e));
  };
  subs[node.id].insert(at(node.begin, node.end));
  cons[node.id].insert({at(0, node.begin), at(node.end, lexemes.size())});
  for (const auto& c : node.children) collect(c, lexemes, subs, cons);
}

struct Tokenized {
  std::vector<std::uint32_t> classes;
  Lexemes lexemes;
};

std::optional<Tokenized> tokenize(const Lexicon& lexicon, const std::string& text) {
  auto r = lexicon.tokenize(text);
  if (!r.ok()) return std::nullopt;
  Tokenized t;
  for (auto& tok : r.tokens) {
    t.classes.push_back(tok.cls);
    t.lexemes.push_back(std::move(tok.lexeme));
  }
  return t;
}

std::string compose(const Lexemes& prefix, const Lexemes& sub, const Lexemes& suffix, char separator) {
  Lexemes all = prefix;
  all.insert(all.end(), sub.begin(), sub.end());
  all.insert(all.end(), suffix.begin(), suffix.end());
  return join_lexemes(all, separator);
}

}  // namespace

std::vector<SwapProfile> swap_profiles(const Grammar& grammar, const Lexicon& lexicon,
                                       const std::vector<std::string>& tests, double parse_timeout,
                                       std::size_t* parsed) {
  const std::size_t n = grammar.nonterminals.size();
  std::vector<std::set<Lexemes>> subs(n);
  std::vector<std::set<std::pair<Lexemes, Lexemes>>> cons(n);
  EarleyParser parser(grammar);
  std::size_t count = 0;
  for (const auto& test : tests) {
    auto t = tokenize(lexicon, test);
    if (!t) continue;
    auto res = parser.parse(t->classes, parse_timeout, &t->lexemes);
    if (!res.parsed()) continue;
    ++count;
    collect(res.tree, t->lexemes, subs, cons);
  }
  if (parsed) *parsed = count;
  std::vector<SwapProfile> out(n);
  for (std::size_t x = 0; x < n; ++x) {
    out[x].sub.assign(subs[x].begin(), subs[x].end());
    out[x].con.assign(cons[x].begin(), cons[x].end());
  }
  return out;
}

std::vector<std::string> swap_set(const std::vector<SwapProfile>& profiles, char separator) {
  std::set<std::string> s;
  for (const auto& p : profiles)
    for (const auto& sub : p.sub)
      for (const auto& [pre, suf] : p.con) s.insert(compose(pre, sub, suf, separator));
  return {s.begin(), s.end()};
}

SwapPrecisionReport swap_precision(const Grammar& grammar, const Lexicon& lexicon,
                                   const std::vector<std::string>& tests, Oracle& oracle, std::uint64_t seed,
                                   const SwapOptions& options) {
  SwapPrecisionReport rep;
  rep.seed = seed;
  auto profiles = swap_profiles(grammar, lexicon, tests, options.parse_timeout, &rep.parsed_tests);
  if (rep.parsed_tests == 0) return rep;
  const char sep = lexicon.separator();

  std::size_t triples = 0;
  for (const auto& p : profiles) triples += p.sub.size() * p.con.size();

  std::mt19937_64 rng(seed);
  std::vector<std::string> chosen;
  if (triples <= options.materialize_limit) {
    auto s = swap_set(profiles, sep);
    rep.swap_set_size = s.size();
    if (s.size() > options.max_strings) {
      rep.sampled = true;
      for (std::size_t i = 0; i < options.max_strings; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, s.size() - 1);
        std::swap(s[i], s[pick(rng)]);
      }
      s.resize(options.max_strings);
    }
    chosen = std::move(s);
  } else {
    rep.materialized = false;
    rep.sampled = true;
    rep.swap_set_size = triples;
    std::vector<double> weights;
    for (const auto& p : profiles) weights.push_back(static_cast<double>(p.sub.size() * p.con.size()));
    std::discrete_distribution<std::size_t> which(weights.begin(), weights.end());
    std::set<std::string> seen;
    const std::size_t attempts = options.max_strings * 100;
    for (std::size_t a = 0; a < attempts && chosen.size() < options.max_strings; ++a) {
      const auto& p = profiles[which(rng)];
      const auto& sub = p.sub[std::uniform_int_distribution<std::size_t>(0, p.sub.size() - 1)(rng)];
      const auto& con = p.con[std::uniform_int_distribution<std::size_t>(0, p.con.size() - 1)(rng)];
      auto w = compose(con.first, sub, con.second, sep);
      if (seen.insert(w).second) chosen.push_back(std::move(w));
    }
  }
  const auto verdicts = oracle.batch_query(chosen);
  rep.evaluated = chosen.size();
  rep.accepted = static_cast<std::size_t>(std::count(verdicts.begin(), verdicts.end(), true));
  rep.value = rep.evaluated ? static_cast<double>(rep.accepted) / static_cast<double>(rep.evaluated) : 1.0;
  return rep;
}

RecallReport recall(const Grammar& grammar, const Lexicon& lexicon, const std::vector<std::string>& tests,
                    double parse_timeout) {
  RecallReport rep;
  rep.total = tests.size();
  EarleyParser parser(grammar);
  for (const auto& test : tests) {
    auto t = tokenize(lexicon, test);
    if (!t) {
      ++rep.untokenizable;
      continue;
    }
    switch (parser.recognize(t->classes, parse_timeout)) {
      case ParseStatus::Parsed: ++rep.parsed; break;
      case ParseStatus::Timeout: ++rep.timeouts; break;
      case ParseStatus::NoParse: break;
    }
  }
  rep.value = rep.total ? static_cast<double>(rep.parsed) / static_cast<double>(rep.total) : 0.0;
  return rep;
}

double f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

class Sampler {
 public:
  Sampler(const Grammar& g, const Lexicon& lexicon, std::mt19937_64& rng, std::size_t max_depth)
      : g_(g), lexicon_(lexicon), rng_(rng), max_depth_(max_depth), rules_of_(g.nonterminals.size()) {
    for (std::size_t i = 0; i < g.rules.size(); ++i) rules_of_[g.rules[i].lhs].push_back(i);
    constexpr std::size_t inf = std::numeric_limits<std::size_t>::max();
    height_.assign(g.nonterminals.size(), inf);
    rule_height_.assign(g.rules.size(), inf);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < g.rules.size(); ++i) {
        std::size_t h = 1;
        for (const auto& s : g.rules[i].rhs)
          if (!s.terminal) h = height_[s.id] == inf ? inf : std::max(h, height_[s.id] + 1);
        rule_height_[i] = h;
        auto& lh = height_[g.rules[i].lhs];
        if (h < lh) {
          lh = h;
          changed = true;
        }
      }
    }
  }

  void expand(std::uint32_t nt, std::size_t depth, Lexemes& out) {
    const auto& rules = rules_of_[nt];
    if (rules.empty()) return;
    std::size_t rule = rules.front();
    if (depth >= max_depth_ || out.size() > kTokenCap) {
      for (auto r : rules)
        if (rule_height_[r] < rule_height_[rule]) rule = r;
    } else {
      rule = rules[std::uniform_int_distribution<std::size_t>(0, rules.size() - 1)(rng_)];
    }
    for (const auto& s : g_.rules[rule].rhs) {
      if (s.terminal)
        out.push_back(s.id < lexicon_.classes.size() ? lexicon_.classes[s.id].dfa.sample(rng_) : std::string());
      else
        expand(s.id, depth + 1, out);
    }
  }

 private:
  static constexpr std::size_t kTokenCap = 10000;
  const Grammar& g_;
  const Lexicon& lexicon_;
  std::mt19937_64& rng_;
  std::size_t max_depth_;
  std::vector<std::vector<std::size_t>> rules_of_;
  std::vector<std::size_t> height_, rule_height_;
};

}  // namespace

std::string sample_program(const Grammar& grammar, const Lexicon& lexicon, std::mt19937_64& rng,
                           std::size_t max_depth) {
  Sampler sampler(grammar, lexicon, rng, max_depth);
  Lexemes out;
  if (grammar.start < grammar.nonterminals.size()) sampler.expand(grammar.start, 0, out);
  return join_lexemes(out, lexicon.separator());
}

double sampling_precision(const Grammar& grammar, const Lexicon& lexicon, Oracle& oracle, std::uint64_t seed,
                          const SamplingOptions& options) {
  if (options.samples == 0) return 0.0;
  std::mt19937_64 rng(seed);
  Sampler sampler(grammar, lexicon, rng, options.max_depth);
  std::vector<std::string> programs;
  programs.reserve(options.samples);
  for (std::size_t i = 0; i < options.samples; ++i) {
    Lexemes out;
    sampler.expand(grammar.start, 0, out);
    programs.push_back(join_lexemes(out, lexicon.separator()));
  }
  auto verdicts = oracle.batch_query(programs);
  return static_cast<double>(std::count(verdicts.begin(), verdicts.end(), true)) /
         static_cast<double>(options.samples);
}

Grammar build_overfit_fixture(const std::vector<std::vector<std::uint32_t>>& examples,
                              const std::vector<std::string>& terminal_names, std::size_t chain) {
  Grammar g;
  g.terminals = terminal_names;
  const auto s = g.add_nonterminal("start");
  const auto m = g.add_nonterminal("memo");
  std::vector<std::uint32_t> c;
  for (std::size_t i = 1; i <= chain; ++i) c.push_back(g.add_nonterminal("c" + std::to_string(i)));
  const auto any = g.add_nonterminal("any");
  g.start = s;
  g.add_rule(s, {Symbol::nt(m)});
  g.add_rule(s, {Symbol::nt(c.empty() ? any : c.front())});
  for (std::size_t i = 0; i < c.size(); ++i) {
    g.add_rule(c[i], {Symbol::nt(m)});
    g.add_rule(c[i], {Symbol::nt(i + 1 < c.size() ? c[i + 1] : any)});
  }
  for (std::uint32_t t = 0; t < terminal_names.size(); ++t) {
    g.add_rule(any, {Symbol::t(t), Symbol::nt(any)});
    g.add_rule(any, {Symbol::t(t)});
  }
  for (const auto& x : examples) {
    std::vector<Symbol> rhs;
    for (auto cls : x) rhs.push_back(Symbol::t(cls));
    g.add_rule(m, std::move(rhs));
  }
  return g;
}

EvalReport evaluate(const Grammar& grammar, const Lexicon& lexicon, const std::vector<std::string>& tests,
                    Oracle& oracle, std::uint64_t seed, const EvalOptions& options) {
  EvalReport rep;
  rep.stats = stats(grammar);
  rep.recall_report = recall(grammar, lexicon, tests, options.parse_timeout);
  rep.recall = rep.recall_report.value;
  rep.parsed_count = rep.recall_report.parsed;
  rep.timeout_count = rep.recall_report.timeouts;
  rep.test_count = tests.size();
  rep.swap = swap_precision(grammar, lexicon, tests, oracle, seed, options.swap);
  rep.swap_precision = rep.swap.value;
  rep.f1 = f1_score(rep.swap_precision.value_or(0.0), rep.recall);
  if (options.with_sampling)
    rep.sampling_precision = sampling_precision(grammar, lexicon, oracle, seed ^ 0x5a5a5a5aULL, options.sampling);
  return rep;
}

std::string to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["swap_precision"] = r.swap_precision ? nlohmann::ordered_json(*r.swap_precision) : nlohmann::ordered_json();
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["sampling_precision"] =
      r.sampling_precision ? nlohmann::ordered_json(*r.sampling_precision) : nlohmann::ordered_json();
  j["parsed_count"] = r.parsed_count;
  j["timeout_count"] = r.timeout_count;
  j["test_count"] = r.test_count;
  j["swap"] = {{"parsed_tests", r.swap.parsed_tests}, {"set_size", r.swap.swap_set_size},
               {"materialized", r.swap.materialized}, {"sampled", r.swap.sampled},
               {"evaluated", r.swap.evaluated},   {"accepted", r.swap.accepted},
               {"seed", r.swap.seed}};
  j["stats"] = {{"NT", r.stats.nonterminals},
                {"T", r.stats.terminals},
                {"A", r.stats.rules},
                {"lA", r.stats.mean_rule_length},
                {"S", r.stats.total_length}};
  return j.dump();
}

std::string to_table(const EvalReport& r) {
  char buf[256];
  std::ostringstream out;
  out << "   p      r      f1    NT   T    A    lA     S\n";
  const std::string p = r.swap_precision ? [&] {
    std::snprintf(buf, sizeof buf, "%.3f", *r.swap_precision);
    return std::string(buf);
  }()
                                         : std::string("  n/a");
  std::snprintf(buf, sizeof buf, "%s  %.3f  %.3f  %-4zu %-4zu %-4zu %-6.2f %zu\n", p.c_str(), r.recall, r.f1,
                r.stats.nonterminals, r.stats.terminals, r.stats.rules, r.stats.mean_rule_length,
                r.stats.total_length);
  out << buf;
  return out.str();
}

}  // namespace bbgi
