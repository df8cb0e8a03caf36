#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bbgi/automata/token_dfa.hpp"
#include "bbgi/oracle/oracle.hpp"

namespace bbgi {

enum class ByteKind { Letterlike, Digit, Punctuation, Whitespace };

ByteKind byte_kind(unsigned char c);

struct SegmentationRules {
  /// Bytes dropped between segments. Whitespace outside this set is kept as
  /// single-byte segments.
  ByteSet insensitive;
};

/// Alphanumeric runs form one segment, every other byte is its own segment,
/// insensitive bytes separate segments and are dropped.
std::vector<std::string> segment(std::string_view example, const SegmentationRules& rules);

/// Whitespace bytes of the corpus whose duplication never changes a verdict.
/// Each byte is tested by doubling one existing occurrence per example that
/// contains it.
ByteSet discover_insensitive(const std::vector<std::string>& corpus, Oracle& oracle);

/// Joins segments, separating touching alphanumeric bytes with the lexicon's
/// separator byte (space when insensitive).
std::string render_segments(const std::vector<std::string>& segments, const ByteSet& insensitive);

/// Tests every boundary not already marked by an insensitive byte by
/// inserting a space; rejected boundaries merge their neighbours. Without an
/// insensitive space the segments are returned unchanged.
std::vector<std::string> refine_boundaries(std::string_view example, const SegmentationRules& rules,
                                           Oracle& oracle);

}  // namespace bbgi
