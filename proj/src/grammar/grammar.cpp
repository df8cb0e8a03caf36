#include "bbgi/grammar/grammar.hpp"

#include <set>

#include "bbgi/errors.hpp"

namespace bbgi {

std::uint32_t Grammar::add_nonterminal(std::string name) {
  nonterminals.push_back(std::move(name));
  return static_cast<std::uint32_t>(nonterminals.size() - 1);
}

void Grammar::add_rule(std::uint32_t lhs, std::vector<Symbol> rhs) {
  rules.push_back({lhs, std::move(rhs)});
}

Grammar normalize(const Grammar& g) {
  std::vector<Rule> unique;
  {
    std::set<Rule> seen;
    for (const auto& r : g.rules)
      if (seen.insert(r).second) unique.push_back(r);
  }

  const std::size_t n = g.nonterminals.size();
  std::vector<bool> productive(n, false);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : unique) {
      if (productive[r.lhs]) continue;
      bool ok = true;
      for (const auto& s : r.rhs)
        if (!s.terminal && !productive[s.id]) {
          ok = false;
          break;
        }
      if (ok) {
        productive[r.lhs] = true;
        changed = true;
      }
    }
  }
  if (g.start >= n || !productive[g.start])
    throw EmptyLanguage("start symbol derives no terminal string");

  std::vector<Rule> useful;
  for (const auto& r : unique) {
    bool ok = productive[r.lhs];
    for (const auto& s : r.rhs)
      if (!s.terminal && !productive[s.id]) ok = false;
    if (ok) useful.push_back(r);
  }

  std::vector<bool> reachable(n, false);
  reachable[g.start] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : useful) {
      if (!reachable[r.lhs]) continue;
      for (const auto& s : r.rhs)
        if (!s.terminal && !reachable[s.id]) {
          reachable[s.id] = true;
          changed = true;
        }
    }
  }

  Grammar out;
  out.terminals = g.terminals;
  std::vector<std::uint32_t> remap(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    if (reachable[i]) remap[i] = out.add_nonterminal(g.nonterminals[i]);
  out.start = remap[g.start];
  for (const auto& r : useful) {
    if (!reachable[r.lhs]) continue;
    Rule nr{remap[r.lhs], r.rhs};
    for (auto& s : nr.rhs)
      if (!s.terminal) s.id = remap[s.id];
    out.rules.push_back(std::move(nr));
  }
  return out;
}

GrammarStats stats(const Grammar& g) {
  GrammarStats st;
  st.nonterminals = g.nonterminals.size();
  st.rules = g.rules.size();
  std::set<std::uint32_t> used;
  for (const auto& r : g.rules) {
    st.total_length += r.rhs.size();
    for (const auto& s : r.rhs)
      if (s.terminal) used.insert(s.id);
  }
  st.terminals = used.size();
  st.mean_rule_length =
      st.rules == 0 ? 0.0 : static_cast<double>(st.total_length) / static_cast<double>(st.rules);
  return st;
}

}  // namespace bbgi
