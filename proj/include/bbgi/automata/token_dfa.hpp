#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace bbgi {

using ByteSet = std::bitset<256>;

ByteSet byte_range(unsigned char lo, unsigned char hi);
ByteSet bytes_of(std::string_view s);

/// Deterministic automaton over bytes recognizing one token class.
///
/// Transitions not listed lead to an implicit dead state, so the automaton is
/// total over every byte. State 0 is the start state.
class TokenDfa {
 public:
  static constexpr int kDead = -1;

  TokenDfa();

  int add_state(bool accepting);
  void set_transition(int from, unsigned char byte, int to);
  void set_range(int from, const ByteSet& bytes, int to);
  void set_accepting(int state, bool accepting);

  int start() const { return 0; }
  std::size_t state_count() const { return accepting_.size(); }
  bool is_accepting(int state) const { return accepting_[static_cast<std::size_t>(state)]; }
  int next(int state, unsigned char byte) const {
    return table_[static_cast<std::size_t>(state)][byte];
  }

  /// Alphabet the token was learned over; transitions only use these bytes.
  const ByteSet& charset() const { return charset_; }
  void set_charset(const ByteSet& cs) { charset_ = cs; }

  bool accepts(std::string_view s) const;

  /// Length of the longest accepted prefix of `s` starting at `pos`, or -1.
  long longest_match(std::string_view s, std::size_t pos) const;

  /// Whether some accepted string exists.
  bool empty_language() const;

  /// Shortest accepted string, smallest bytes first on ties. Empty language
  /// yields an empty string; check empty_language() first.
  std::string shortest_accepted() const;

  /// Random member: a walk over live transitions with geometric length,
  /// completed by the shortest path to acceptance.
  std::string sample(std::mt19937_64& rng, double stop_probability = 0.2,
                     std::size_t cap = 32) const;

  /// Minimal equivalent automaton with dead and unreachable states removed
  /// and states numbered in breadth-first byte order. Equal languages give
  /// equal canonical forms.
  TokenDfa canonical() const;

  static TokenDfa literal(std::string_view s);
  /// One or more bytes from `bytes`.
  static TokenDfa plus(const ByteSet& bytes);
  /// Exactly one byte from `bytes`.
  static TokenDfa one_of(const ByteSet& bytes);

  bool operator==(const TokenDfa& other) const = default;

 private:
  std::vector<std::array<int, 256>> table_;
  std::vector<bool> accepting_;
  ByteSet charset_;

  std::vector<bool> live_states() const;
  std::vector<int> distance_to_accept() const;
};

}  // namespace bbgi
