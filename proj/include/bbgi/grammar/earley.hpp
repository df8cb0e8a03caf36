#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bbgi/grammar/grammar.hpp"

namespace bbgi {

struct ParseTree {
  enum class Kind { Nonterminal, Token };

  Kind kind = Kind::Nonterminal;
  /// Nonterminal id or token-class id.
  std::uint32_t id = 0;
  /// Rule used at a nonterminal node, -1 for tokens.
  int rule = -1;
  std::string lexeme;
  /// Token span [begin, end) covered by this node.
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<ParseTree> children;

  bool is_token() const { return kind == Kind::Token; }
  std::vector<std::uint32_t> leaf_classes() const;
  std::vector<std::string> leaf_lexemes() const;

  bool operator==(const ParseTree&) const = default;
};

enum class ParseStatus { Parsed, NoParse, Timeout };

struct ParseResult {
  ParseStatus status = ParseStatus::NoParse;
  ParseTree tree;

  bool parsed() const { return status == ParseStatus::Parsed; }
};

constexpr double kNoTimeout = std::numeric_limits<double>::infinity();

/// Earley recognizer and tree builder for arbitrary context-free grammars,
/// including empty rules, unit cycles and ambiguity.
///
/// At each nonterminal the lowest-index rule that derives the span is used,
/// so trees are deterministic.
class EarleyParser {
 public:
  explicit EarleyParser(Grammar g);

  const Grammar& grammar() const { return grammar_; }

  ParseResult parse(const std::vector<std::uint32_t>& tokens, double timeout_seconds = kNoTimeout,
                    const std::vector<std::string>* lexemes = nullptr) const;

  /// Recognition only: Parsed, NoParse or Timeout, no tree.
  ParseStatus recognize(const std::vector<std::uint32_t>& tokens,
                        double timeout_seconds = kNoTimeout) const;

  /// Timeout counts as rejection.
  bool accepts(const std::vector<std::uint32_t>& tokens,
               double timeout_seconds = kNoTimeout) const;

 private:
  struct Chart;

  Grammar grammar_;
  std::vector<std::vector<std::uint32_t>> rules_of_;
  std::vector<bool> nullable_;

  ParseStatus run_chart(const std::vector<std::uint32_t>& tokens,
                        std::chrono::steady_clock::time_point deadline, Chart& chart) const;
};

ParseResult parse(const Grammar& g, const std::vector<std::uint32_t>& tokens,
                  double timeout_seconds = kNoTimeout);
bool accepts(const Grammar& g, const std::vector<std::uint32_t>& tokens,
             double timeout_seconds = kNoTimeout);

}  // namespace bbgi
