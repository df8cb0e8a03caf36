#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "bbgi/grammar/grammar.hpp"
#include "bbgi/lexinf/lexicon.hpp"
#include "bbgi/oracle/oracle.hpp"

namespace bbgi {

/// A built-in language: ground-truth lexicon and grammar.
struct ReferenceLanguage {
  std::string name;
  Grammar grammar;
  Lexicon lexicon;
};

/// Tiny-C style statements: single-letter identifiers, one statement per program.
ReferenceLanguage tinyc_language();
/// JSON values with lowercase-letter strings and unsigned integers.
ReferenceLanguage json_language();
/// Balanced sequences over () and [].
ReferenceLanguage parens_language();

std::vector<std::string> builtin_language_names();
/// Throws std::invalid_argument for an unknown name.
ReferenceLanguage builtin_language(std::string_view name);

std::unique_ptr<Oracle> make_reference_oracle(const ReferenceLanguage& lang,
                                              double per_query_timeout = 10.0,
                                              std::size_t cache_capacity = 0);

struct GenerateOptions {
  std::size_t max_depth = 7;
  std::size_t min_tokens = 1;
  std::size_t max_tokens = 40;
  /// Chance of a space between two tokens that do not need one.
  double space_probability = 0.3;
  /// Chance of a newline after a token that ends a statement.
  double newline_probability = 0.0;
};

/// Random program of the language: uniform rule choice, switching to the
/// shallowest rules past max_depth; lexemes are random members of each class.
std::string generate_program(const ReferenceLanguage& lang, std::mt19937_64& rng,
                             const GenerateOptions& options);

/// `count` distinct programs.
std::vector<std::string> generate_corpus(const ReferenceLanguage& lang, std::size_t count,
                                         std::uint64_t seed, const GenerateOptions& options);

/// Generation settings used by the desk-scale benchmarks.
GenerateOptions default_generate_options(std::string_view language);

}  // namespace bbgi
