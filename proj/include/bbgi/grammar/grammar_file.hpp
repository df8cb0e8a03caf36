#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "bbgi/grammar/grammar.hpp"
#include "bbgi/lexinf/lexicon.hpp"

namespace bbgi {

/// Text format, one directive per line:
///
///   bbgi-grammar 1
///   tokens <count> <dfa|names>
///   insensitive "<bytes>"
///   token "<name>"              (then, in dfa mode:)
///     charset [<ranges>]
///     states <n>
///     accept <state ids>
///     edge <from> [<lo>-<hi>] <to>
///     end
///   nonterminals <count> <name>...
///   rules <count>
///   <lhs> -> <sym> <sym> ...    (terminals quoted, nonterminals bare)
///   start <name>
///
/// Bytes outside 0x20-0x7E and the delimiters \ " [ ] - are written \xHH.
std::string serialize(const Grammar& g, const Lexicon& lexicon);

/// Throws MalformedInput with line and offset on bad input.
std::pair<Grammar, Lexicon> deserialize(std::string_view text);

/// Human-readable dump; never read back.
std::string ebnf(const Grammar& g, const Lexicon& lexicon);

std::string escape_bytes(std::string_view bytes);

}  // namespace bbgi
