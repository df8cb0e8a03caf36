#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbgi/automata/token_dfa.hpp"
#include "bbgi/oracle/oracle.hpp"

namespace bbgi {

/// Segments around a hole: prefix □ suffix.
struct LexContext {
  std::vector<std::string> prefix;
  std::vector<std::string> suffix;

  auto operator<=>(const LexContext&) const = default;
};

/// Fills the hole with `x`, separating touching alphanumeric segments.
std::string fill(const LexContext& context, const std::string& x, char separator);

/// Token oracle G(x, C): x is a member iff it behaves like the seeds in every
/// context of C. The empty string is never a member.
class TokenOracle {
 public:
  TokenOracle(Oracle& oracle, std::vector<LexContext> contexts, std::vector<std::string> seeds,
              char separator);

  bool member(const std::string& x);
  std::vector<bool> members(const std::vector<std::string>& xs);

  const std::vector<std::string>& seeds() const { return seeds_; }
  const std::vector<LexContext>& contexts() const { return contexts_; }
  /// Distinct strings answered so far.
  std::size_t answered() const { return memo_.size(); }
  const std::map<std::string, bool>& answers() const { return memo_; }

 private:
  Oracle& oracle_;
  std::vector<LexContext> contexts_;
  std::vector<std::string> seeds_;
  char separator_;
  std::vector<bool> expected_;
  std::map<std::string, bool> memo_;
};

bool token_membership(Oracle& oracle, const std::string& x, const std::vector<LexContext>& contexts,
                      const std::vector<std::string>& seeds, char separator);

/// Bytes a token class is learned over: all ASCII letters if a seed has a
/// letter, all digits if a seed has a digit, plus every seed byte.
ByteSet token_charset(const std::vector<std::string>& seeds);

struct EquivalenceResult {
  bool equivalent = true;
  std::string counterexample;
};

/// Approximate equivalence: random walks over the hypothesis checked with G,
/// then seed inclusion.
EquivalenceResult approx_equivalence(const TokenDfa& hypothesis, TokenOracle& g,
                                     std::size_t sample_budget, std::uint64_t rng_seed);

/// Angluin observation table over a fixed alphabet.
class ObservationTable {
 public:
  using Membership = std::function<std::vector<bool>(const std::vector<std::string>&)>;

  ObservationTable(std::vector<unsigned char> alphabet, Membership mq);

  /// Fills missing cells, then repairs closedness and consistency until both hold.
  void complete();
  bool closed() const;
  bool consistent() const;
  /// Adds every prefix of `w` to S.
  void add_counterexample(const std::string& w);
  TokenDfa hypothesis(const ByteSet& charset) const;

  const std::vector<std::string>& prefixes() const { return s_; }
  const std::vector<std::string>& suffixes() const { return e_; }
  /// Membership of `w` as recorded in the table; `w` must have been queried.
  bool value(const std::string& w) const { return cells_.at(w); }
  std::size_t queried() const { return cells_.size(); }

 private:
  std::vector<unsigned char> alphabet_;
  Membership mq_;
  std::vector<std::string> s_;
  std::vector<std::string> e_;
  std::map<std::string, bool> cells_;

  void fill();
  std::vector<bool> row(const std::string& s) const;
  std::optional<std::string> unclosed() const;
  std::optional<std::string> inconsistency() const;
};

struct LearnOptions {
  std::size_t max_rounds = 50;
  std::size_t sample_budget = 200;
};

struct LearnResult {
  TokenDfa dfa;
  /// False when the round cap stopped learning before EQ passed.
  bool final = true;
  std::size_t rounds = 0;
};

LearnResult learn_token_dfa(TokenOracle& g, std::uint64_t rng_seed, const LearnOptions& options = {});

}  // namespace bbgi
