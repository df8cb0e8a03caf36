#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace bbgi {

struct Symbol {
  bool terminal = false;
  std::uint32_t id = 0;

  static Symbol t(std::uint32_t id) { return {true, id}; }
  static Symbol nt(std::uint32_t id) { return {false, id}; }

  auto operator<=>(const Symbol&) const = default;
};

struct Rule {
  std::uint32_t lhs = 0;
  std::vector<Symbol> rhs;

  auto operator<=>(const Rule&) const = default;
};

/// Context-free grammar over token-class ids.
///
/// Terminal ids index `terminals` (one name per token class of the lexicon);
/// nonterminal ids index `nonterminals`.
struct Grammar {
  std::vector<std::string> nonterminals;
  std::vector<std::string> terminals;
  std::vector<Rule> rules;
  std::uint32_t start = 0;

  std::uint32_t add_nonterminal(std::string name);
  void add_rule(std::uint32_t lhs, std::vector<Symbol> rhs);

  bool operator==(const Grammar&) const = default;
};

struct GrammarStats {
  std::size_t nonterminals = 0;
  std::size_t terminals = 0;
  std::size_t rules = 0;
  double mean_rule_length = 0.0;
  std::size_t total_length = 0;
};

/// Drops duplicate rules, then unproductive and unreachable nonterminals.
/// Throws EmptyLanguage when the start symbol is unproductive.
Grammar normalize(const Grammar& g);

/// NT counts nonterminals, T counts distinct terminals used by rules.
GrammarStats stats(const Grammar& g);

}  // namespace bbgi
