#include "bbgi/automata/token_dfa.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace bbgi {

ByteSet byte_range(unsigned char lo, unsigned char hi) {
  ByteSet out;
  for (unsigned b = lo; b <= hi; ++b) out.set(b);
  return out;
}

ByteSet bytes_of(std::string_view s) {
  ByteSet out;
  for (unsigned char c : s) out.set(c);
  return out;
}

TokenDfa::TokenDfa() { add_state(false); }

int TokenDfa::add_state(bool accepting) {
  std::array<int, 256> row;
  row.fill(kDead);
  table_.push_back(row);
  accepting_.push_back(accepting);
  return static_cast<int>(accepting_.size() - 1);
}

void TokenDfa::set_transition(int from, unsigned char byte, int to) {
  table_[static_cast<std::size_t>(from)][byte] = to;
  charset_.set(byte);
}

void TokenDfa::set_range(int from, const ByteSet& bytes, int to) {
  for (unsigned b = 0; b < 256; ++b)
    if (bytes.test(b)) set_transition(from, static_cast<unsigned char>(b), to);
}

void TokenDfa::set_accepting(int state, bool accepting) {
  accepting_[static_cast<std::size_t>(state)] = accepting;
}

bool TokenDfa::accepts(std::string_view s) const {
  int q = start();
  for (unsigned char c : s) {
    q = next(q, c);
    if (q == kDead) return false;
  }
  return is_accepting(q);
}

long TokenDfa::longest_match(std::string_view s, std::size_t pos) const {
  long best = is_accepting(start()) ? 0 : -1;
  int q = start();
  for (std::size_t i = pos; i < s.size(); ++i) {
    q = next(q, static_cast<unsigned char>(s[i]));
    if (q == kDead) break;
    if (is_accepting(q)) best = static_cast<long>(i - pos + 1);
  }
  return best;
}

std::vector<int> TokenDfa::distance_to_accept() const {
  const std::size_t n = state_count();
  std::vector<int> dist(n, -1);
  std::vector<std::vector<int>> reverse(n);
  for (std::size_t q = 0; q < n; ++q)
    for (unsigned b = 0; b < 256; ++b)
      if (int t = table_[q][b]; t != kDead) reverse[static_cast<std::size_t>(t)].push_back(static_cast<int>(q));
  std::deque<int> work;
  for (std::size_t q = 0; q < n; ++q)
    if (accepting_[q]) {
      dist[q] = 0;
      work.push_back(static_cast<int>(q));
    }
  while (!work.empty()) {
    int q = work.front();
    work.pop_front();
    for (int p : reverse[static_cast<std::size_t>(q)])
      if (dist[static_cast<std::size_t>(p)] < 0) {
        dist[static_cast<std::size_t>(p)] = dist[static_cast<std::size_t>(q)] + 1;
        work.push_back(p);
      }
  }
  return dist;
}

std::vector<bool> TokenDfa::live_states() const {
  auto dist = distance_to_accept();
  std::vector<bool> live(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) live[i] = dist[i] >= 0;
  return live;
}

bool TokenDfa::empty_language() const { return distance_to_accept()[0] < 0; }

std::string TokenDfa::shortest_accepted() const {
  auto dist = distance_to_accept();
  std::string out;
  int q = start();
  if (dist[0] < 0) return out;
  while (!is_accepting(q)) {
    for (unsigned b = 0; b < 256; ++b) {
      int t = table_[static_cast<std::size_t>(q)][b];
      if (t != kDead && dist[static_cast<std::size_t>(t)] == dist[static_cast<std::size_t>(q)] - 1) {
        out.push_back(static_cast<char>(b));
        q = t;
        break;
      }
    }
  }
  return out;
}

std::string TokenDfa::sample(std::mt19937_64& rng, double stop_probability,
                             std::size_t cap) const {
  auto dist = distance_to_accept();
  std::string out;
  if (dist[0] < 0) return out;
  std::bernoulli_distribution stop(stop_probability);
  int q = start();
  while (out.size() < cap && !stop(rng)) {
    std::vector<unsigned> moves;
    for (unsigned b = 0; b < 256; ++b) {
      int t = table_[static_cast<std::size_t>(q)][b];
      if (t != kDead && dist[static_cast<std::size_t>(t)] >= 0) moves.push_back(b);
    }
    if (moves.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, moves.size() - 1);
    unsigned b = moves[pick(rng)];
    out.push_back(static_cast<char>(b));
    q = table_[static_cast<std::size_t>(q)][b];
  }
  while (!is_accepting(q)) {
    for (unsigned b = 0; b < 256; ++b) {
      int t = table_[static_cast<std::size_t>(q)][b];
      if (t != kDead && dist[static_cast<std::size_t>(t)] == dist[static_cast<std::size_t>(q)] - 1) {
        out.push_back(static_cast<char>(b));
        q = t;
        break;
      }
    }
  }
  return out;
}

TokenDfa TokenDfa::canonical() const {
  const std::size_t n = state_count();
  auto live = live_states();
  // Moore refinement over live states; dead states form the implicit sink.
  std::vector<int> block(n, -1);
  for (std::size_t q = 0; q < n; ++q)
    if (live[q]) block[q] = accepting_[q] ? 1 : 0;
  std::size_t blocks = 0;
  while (true) {
    std::map<std::vector<int>, int> signature_ids;
    std::vector<int> refined(n, -1);
    for (std::size_t q = 0; q < n; ++q) {
      if (!live[q]) continue;
      std::vector<int> sig;
      sig.reserve(257);
      sig.push_back(block[q]);
      for (unsigned b = 0; b < 256; ++b) {
        int t = table_[q][b];
        sig.push_back(t == kDead ? -1 : block[static_cast<std::size_t>(t)]);
      }
      auto [it, inserted] = signature_ids.emplace(std::move(sig), static_cast<int>(signature_ids.size()));
      refined[q] = it->second;
    }
    std::size_t count = signature_ids.size();
    block = std::move(refined);
    if (count == blocks) break;
    blocks = count;
  }

  TokenDfa out;
  out.charset_ = charset_;
  if (!live[0]) return out;
  // Breadth-first renumbering from the start block.
  std::vector<int> representative(blocks, -1);
  for (std::size_t q = 0; q < n; ++q)
    if (live[q] && representative[static_cast<std::size_t>(block[q])] < 0)
      representative[static_cast<std::size_t>(block[q])] = static_cast<int>(q);
  std::vector<int> number(blocks, -1);
  std::deque<int> work;
  number[static_cast<std::size_t>(block[0])] = 0;
  out.set_accepting(0, accepting_[0]);
  work.push_back(block[0]);
  while (!work.empty()) {
    int blk = work.front();
    work.pop_front();
    int q = representative[static_cast<std::size_t>(blk)];
    for (unsigned b = 0; b < 256; ++b) {
      int t = table_[static_cast<std::size_t>(q)][b];
      if (t == kDead || !live[static_cast<std::size_t>(t)]) continue;
      int tb = block[static_cast<std::size_t>(t)];
      if (number[static_cast<std::size_t>(tb)] < 0) {
        number[static_cast<std::size_t>(tb)] = out.add_state(accepting_[static_cast<std::size_t>(t)]);
        work.push_back(tb);
      }
      out.table_[static_cast<std::size_t>(number[static_cast<std::size_t>(blk)])][b] =
          number[static_cast<std::size_t>(tb)];
    }
  }
  return out;
}

TokenDfa TokenDfa::literal(std::string_view s) {
  TokenDfa d;
  int q = d.start();
  for (unsigned char c : s) {
    int t = d.add_state(false);
    d.set_transition(q, c, t);
    q = t;
  }
  d.set_accepting(q, true);
  return d;
}

TokenDfa TokenDfa::plus(const ByteSet& bytes) {
  TokenDfa d;
  int q = d.add_state(true);
  d.set_range(d.start(), bytes, q);
  d.set_range(q, bytes, q);
  return d;
}

TokenDfa TokenDfa::one_of(const ByteSet& bytes) {
  TokenDfa d;
  int q = d.add_state(true);
  d.set_range(d.start(), bytes, q);
  return d;
}

}  // namespace bbgi
