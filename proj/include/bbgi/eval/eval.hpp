#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bbgi/grammar/earley.hpp"
#include "bbgi/grammar/grammar.hpp"
#include "bbgi/lexinf/lexicon.hpp"
#include "bbgi/oracle/oracle.hpp"

namespace bbgi {

inline constexpr double kRecallTimeout = 60.0;

/// Observed substrings and contexts of one nonterminal, as lexeme sequences.
struct SwapProfile {
  std::vector<std::vector<std::string>> sub;
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> con;
};

struct SwapOptions {
  std::size_t max_strings = 1000;
  /// Above this many (nonterminal, sub, con) triples S is sampled, not built.
  std::size_t materialize_limit = 200000;
  double parse_timeout = kRecallTimeout;
};

struct SwapPrecisionReport {
  /// Unset when no test program parses.
  std::optional<double> value;
  std::size_t parsed_tests = 0;
  /// |S| when materialized, else the triple count.
  std::size_t swap_set_size = 0;
  bool materialized = true;
  bool sampled = false;
  std::size_t evaluated = 0;
  std::size_t accepted = 0;
  std::uint64_t seed = 0;
};

/// Per-nonterminal Sub and Con collected from one parse per test program.
std::vector<SwapProfile> swap_profiles(const Grammar& grammar, const Lexicon& lexicon,
                                       const std::vector<std::string>& tests, double parse_timeout,
                                       std::size_t* parsed = nullptr);

/// The flattened swap set: every Sub(x) string in every Con(x) context.
std::vector<std::string> swap_set(const std::vector<SwapProfile>& profiles, char separator);

/// Accepted fraction of S, or of 1000 seeded picks from S when larger.
SwapPrecisionReport swap_precision(const Grammar& grammar, const Lexicon& lexicon,
                                   const std::vector<std::string>& tests, Oracle& oracle, std::uint64_t seed,
                                   const SwapOptions& options = {});

struct RecallReport {
  double value = 0.0;
  std::size_t parsed = 0;
  std::size_t timeouts = 0;
  std::size_t untokenizable = 0;
  std::size_t total = 0;
};

RecallReport recall(const Grammar& grammar, const Lexicon& lexicon, const std::vector<std::string>& tests,
                    double parse_timeout = kRecallTimeout);

double f1_score(double precision, double recall);

struct SamplingOptions {
  std::size_t samples = 1000;
  std::size_t max_depth = 20;
};

/// Random derivations with uniform rule choice; past max_depth each
/// nonterminal takes its shallowest rule. Lexemes are sampled from the class DFAs.
std::string sample_program(const Grammar& grammar, const Lexicon& lexicon, std::mt19937_64& rng,
                           std::size_t max_depth);

double sampling_precision(const Grammar& grammar, const Lexicon& lexicon, Oracle& oracle, std::uint64_t seed,
                          const SamplingOptions& options = {});

/// S -> M | C1, Ci -> M | Ci+1, Cd -> Any, Any -> t Any | t for every
/// terminal t, and one M rule per training example.
Grammar build_overfit_fixture(const std::vector<std::vector<std::uint32_t>>& examples,
                              const std::vector<std::string>& terminal_names, std::size_t chain = 10);

struct EvalReport {
  std::optional<double> swap_precision;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> sampling_precision;
  std::size_t parsed_count = 0;
  std::size_t timeout_count = 0;
  std::size_t test_count = 0;
  GrammarStats stats;
  SwapPrecisionReport swap;
  RecallReport recall_report;
};

struct EvalOptions {
  SwapOptions swap;
  double parse_timeout = kRecallTimeout;
  bool with_sampling = false;
  SamplingOptions sampling;
};

EvalReport evaluate(const Grammar& grammar, const Lexicon& lexicon, const std::vector<std::string>& tests,
                    Oracle& oracle, std::uint64_t seed, const EvalOptions& options = {});

/// Single-line JSON object.
std::string to_json(const EvalReport& report);
/// p / r / f1 table.
std::string to_table(const EvalReport& report);

}  // namespace bbgi
