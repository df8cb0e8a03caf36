#include "bbgi/oracle/reference_languages.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bbgi {

namespace {

class Builder {
 public:
  explicit Builder(std::string name) { lang_.name = std::move(name); }

  void token(const std::string& name, TokenDfa dfa) {
    lang_.lexicon.classes.push_back({name, std::move(dfa)});
    lang_.grammar.terminals.push_back(name);
  }

  // `rhs` is space separated; quoted words are token names.
  void rule(const std::string& lhs, const std::string& rhs) {
    std::vector<Symbol> syms;
    std::istringstream in(rhs);
    std::string w;
    while (in >> w) {
      if (w.size() >= 2 && w.front() == '\'' && w.back() == '\'') {
        auto id = lang_.lexicon.find(w.substr(1, w.size() - 2));
        if (!id) throw std::logic_error("unknown token " + w);
        syms.push_back(Symbol::t(*id));
      } else {
        syms.push_back(Symbol::nt(nonterminal(w)));
      }
    }
    lang_.grammar.add_rule(nonterminal(lhs), std::move(syms));
  }

  ReferenceLanguage finish(const std::string& start) {
    lang_.grammar.start = nonterminal(start);
    for (unsigned char c : std::string(" \t\n\r")) lang_.lexicon.insensitive.set(c);
    return std::move(lang_);
  }

 private:
  ReferenceLanguage lang_;
  std::map<std::string, std::uint32_t> ids_;

  std::uint32_t nonterminal(const std::string& n) {
    auto it = ids_.find(n);
    if (it != ids_.end()) return it->second;
    std::uint32_t id = lang_.grammar.add_nonterminal(n);
    ids_[n] = id;
    return id;
  }
};

void literal_tokens(Builder& b, std::initializer_list<const char*> names) {
  for (const char* n : names) b.token(n, TokenDfa::literal(n));
}

}  // namespace

ReferenceLanguage tinyc_language() {
  Builder b("tinyc");
  literal_tokens(b, {"if", "else", "while"});
  b.token("id", TokenDfa::one_of(byte_range('a', 'z')));
  b.token("num", TokenDfa::plus(byte_range('0', '9')));
  literal_tokens(b, {"{", "}", "(", ")", ";", "=", "+", "-", "<"});
  b.rule("program", "stmt");
  b.rule("stmt", "'if' pexpr stmt");
  b.rule("stmt", "'if' pexpr stmt 'else' stmt");
  b.rule("stmt", "'while' pexpr stmt");
  b.rule("stmt", "'{' stmts '}'");
  b.rule("stmt", "'{' '}'");
  b.rule("stmt", "expr ';'");
  b.rule("stmt", "';'");
  b.rule("stmts", "stmt");
  b.rule("stmts", "stmt stmts");
  b.rule("pexpr", "'(' expr ')'");
  b.rule("expr", "test");
  b.rule("expr", "'id' '=' expr");
  b.rule("test", "sum");
  b.rule("test", "sum '<' sum");
  b.rule("sum", "term");
  b.rule("sum", "sum '+' term");
  b.rule("sum", "sum '-' term");
  b.rule("term", "'id'");
  b.rule("term", "'num'");
  b.rule("term", "pexpr");
  return b.finish("program");
}

ReferenceLanguage json_language() {
  Builder b("json");
  literal_tokens(b, {"true", "false", "null"});
  TokenDfa str;
  int body = str.add_state(false);
  int done = str.add_state(true);
  str.set_transition(str.start(), '"', body);
  str.set_range(body, byte_range('a', 'z'), body);
  str.set_transition(body, '"', done);
  b.token("string", std::move(str));
  b.token("number", TokenDfa::plus(byte_range('0', '9')));
  literal_tokens(b, {"{", "}", "[", "]", ":", ","});
  b.rule("json", "value");
  b.rule("value", "object");
  b.rule("value", "array");
  b.rule("value", "'string'");
  b.rule("value", "'number'");
  b.rule("value", "'true'");
  b.rule("value", "'false'");
  b.rule("value", "'null'");
  b.rule("object", "'{' '}'");
  b.rule("object", "'{' members '}'");
  b.rule("members", "pair");
  b.rule("members", "pair ',' members");
  b.rule("pair", "'string' ':' value");
  b.rule("array", "'[' ']'");
  b.rule("array", "'[' elements ']'");
  b.rule("elements", "value");
  b.rule("elements", "value ',' elements");
  return b.finish("json");
}

ReferenceLanguage parens_language() {
  Builder b("parens");
  literal_tokens(b, {"(", ")", "[", "]"});
  b.rule("seq", "item");
  b.rule("seq", "item seq");
  b.rule("item", "'(' ')'");
  b.rule("item", "'[' ']'");
  b.rule("item", "'(' seq ')'");
  b.rule("item", "'[' seq ']'");
  return b.finish("seq");
}

std::vector<std::string> builtin_language_names() { return {"tinyc", "json", "parens"}; }

ReferenceLanguage builtin_language(std::string_view name) {
  if (name == "tinyc") return tinyc_language();
  if (name == "json") return json_language();
  if (name == "parens") return parens_language();
  throw std::invalid_argument("unknown built-in language '" + std::string(name) + "'");
}

std::unique_ptr<Oracle> make_reference_oracle(const ReferenceLanguage& lang, double per_query_timeout,
                                              std::size_t cache_capacity) {
  return std::make_unique<Oracle>(std::make_shared<ReferenceBackend>(lang.grammar, lang.lexicon),
                                  per_query_timeout, cache_capacity);
}

namespace {

// Height of the shallowest derivation tree of each nonterminal.
std::vector<std::size_t> min_heights(const Grammar& g) {
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> h(g.nonterminals.size(), kInf);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : g.rules) {
      std::size_t worst = 0;
      for (const auto& s : r.rhs) {
        if (s.terminal) continue;
        worst = std::max(worst, h[s.id]);
      }
      if (worst == kInf) continue;
      if (worst + 1 < h[r.lhs]) {
        h[r.lhs] = worst + 1;
        changed = true;
      }
    }
  }
  return h;
}

std::size_t rule_height(const Rule& r, const std::vector<std::size_t>& h) {
  std::size_t worst = 0;
  for (const auto& s : r.rhs)
    if (!s.terminal) worst = std::max(worst, h[s.id]);
  return worst + 1;
}

bool derive(const Grammar& g, const std::vector<std::vector<std::size_t>>& rules_of,
            const std::vector<std::size_t>& h, std::uint32_t nt, std::size_t depth,
            const GenerateOptions& opt, std::mt19937_64& rng, std::vector<std::uint32_t>& out) {
  const auto& candidates = rules_of[nt];
  std::vector<std::size_t> pool;
  if (depth >= opt.max_depth) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (auto r : candidates) best = std::min(best, rule_height(g.rules[r], h));
    for (auto r : candidates)
      if (rule_height(g.rules[r], h) == best) pool.push_back(r);
  } else {
    pool = candidates;
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  const Rule& rule = g.rules[pool[pick(rng)]];
  for (const auto& s : rule.rhs) {
    if (out.size() > opt.max_tokens) return false;
    if (s.terminal)
      out.push_back(s.id);
    else if (!derive(g, rules_of, h, s.id, depth + 1, opt, rng, out))
      return false;
  }
  return true;
}

}  // namespace

std::string generate_program(const ReferenceLanguage& lang, std::mt19937_64& rng,
                             const GenerateOptions& options) {
  const Grammar& g = lang.grammar;
  std::vector<std::vector<std::size_t>> rules_of(g.nonterminals.size());
  for (std::size_t r = 0; r < g.rules.size(); ++r) rules_of[g.rules[r].lhs].push_back(r);
  const auto h = min_heights(g);
  std::vector<std::uint32_t> classes;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    classes.clear();
    if (derive(g, rules_of, h, g.start, 0, options, rng, classes) &&
        classes.size() >= options.min_tokens && classes.size() <= options.max_tokens)
      break;
  }
  std::bernoulli_distribution space(options.space_probability);
  std::bernoulli_distribution newline(options.newline_probability);
  std::string out;
  std::string previous;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& cls = lang.lexicon.classes[classes[i]];
    std::string lexeme = cls.dfa.sample(rng, 0.35, 8);
    if (!out.empty()) {
      const bool ends_statement = previous == ";" || previous == "{" || previous == "}";
      if (ends_statement && newline(rng))
        out.push_back('\n');
      else if ((is_alnum_byte(static_cast<unsigned char>(out.back())) &&
                is_alnum_byte(static_cast<unsigned char>(lexeme.front()))) ||
               space(rng))
        out.push_back(' ');
    }
    out += lexeme;
    previous = cls.name;
  }
  return out;
}

std::vector<std::string> generate_corpus(const ReferenceLanguage& lang, std::size_t count,
                                         std::uint64_t seed, const GenerateOptions& options) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t attempt = 0; out.size() < count && attempt < count * 1000; ++attempt) {
    std::string p = generate_program(lang, rng, options);
    if (seen.insert(p).second) out.push_back(std::move(p));
  }
  return out;
}

GenerateOptions default_generate_options(std::string_view language) {
  GenerateOptions o;
  if (language == "tinyc") {
    o.max_depth = 7;
    o.max_tokens = 40;
    o.space_probability = 0.25;
    o.newline_probability = 0.5;
  } else if (language == "json") {
    o.max_depth = 5;
    o.min_tokens = 3;
    o.max_tokens = 40;
    o.space_probability = 0.3;
  } else {
    o.max_depth = 6;
    o.max_tokens = 30;
    o.space_probability = 0.1;
  }
  return o;
}

}  // namespace bbgi
