#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbgi/automata/token_dfa.hpp"

namespace bbgi {

struct TokenClass {
  std::string name;
  TokenDfa dfa;

  bool operator==(const TokenClass&) const = default;
};

struct Token {
  std::uint32_t cls = 0;
  std::string lexeme;
  std::size_t offset = 0;

  bool operator==(const Token&) const = default;
};

struct TokenizeResult {
  std::vector<Token> tokens;
  /// Offset of the first byte no token class matches; unset on success.
  std::optional<std::size_t> error_offset;

  bool ok() const { return !error_offset.has_value(); }
};

/// Token classes plus the grammar-insensitive byte set.
///
/// Tokenization skips insensitive bytes between tokens and otherwise takes the
/// longest match over all classes; ties go to the class created first.
class Lexicon {
 public:
  std::vector<TokenClass> classes;
  ByteSet insensitive;

  TokenizeResult tokenize(std::string_view input) const;

  /// Separator placed between adjacent alphanumeric lexemes, or 0 when the
  /// lexicon has no insensitive byte.
  char separator() const;

  /// Shortest accepted string of every class.
  std::vector<std::string> canonical_lexemes() const;

  /// Index of a class by name.
  std::optional<std::uint32_t> find(std::string_view name) const;

  bool operator==(const Lexicon&) const = default;
};

/// Concatenates lexemes, inserting `separator` between two lexemes whose
/// touching bytes are both alphanumeric. A zero separator inserts nothing.
std::string join_lexemes(const std::vector<std::string>& lexemes, char separator);

/// Renders a class sequence with one lexeme per class.
std::string render_classes(const std::vector<std::uint32_t>& classes,
                           const std::vector<std::string>& lexeme_of, char separator);

/// Letters, digits, underscore and non-ASCII bytes.
bool is_alnum_byte(unsigned char c);

}  // namespace bbgi
