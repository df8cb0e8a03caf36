#include "bbgi/automata/lstar.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "bbgi/lexinf/lexicon.hpp"

namespace bbgi {

std::string fill(const LexContext& context, const std::string& x, char separator) {
  std::vector<std::string> parts = context.prefix;
  parts.push_back(x);
  parts.insert(parts.end(), context.suffix.begin(), context.suffix.end());
  return join_lexemes(parts, separator);
}

TokenOracle::TokenOracle(Oracle& oracle, std::vector<LexContext> contexts, std::vector<std::string> seeds,
                         char separator)
    : oracle_(oracle), contexts_(std::move(contexts)), seeds_(std::move(seeds)), separator_(separator) {
  std::vector<std::string> probes;
  probes.reserve(contexts_.size());
  if (!seeds_.empty())
    for (const auto& c : contexts_) probes.push_back(fill(c, seeds_.front(), separator_));
  expected_ = oracle_.batch_query(probes);
  // Contexts accepting the seed come first: they reject most non-members.
  std::vector<std::size_t> order(contexts_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return expected_[a] > expected_[b]; });
  std::vector<LexContext> sorted;
  std::vector<bool> verdicts;
  for (auto i : order) {
    sorted.push_back(contexts_[i]);
    verdicts.push_back(expected_[i]);
  }
  contexts_ = std::move(sorted);
  expected_ = std::move(verdicts);
}

std::vector<bool> TokenOracle::members(const std::vector<std::string>& xs) {
  // Contexts are checked one at a time; a candidate drops out at its first mismatch.
  std::vector<std::string> pending;
  std::set<std::string> seen;
  for (const auto& x : xs)
    if (!x.empty() && !memo_.count(x) && seen.insert(x).second) pending.push_back(x);
  for (std::size_t k = 0; k < contexts_.size() && !pending.empty(); ++k) {
    std::vector<std::string> probes;
    probes.reserve(pending.size());
    for (const auto& x : pending) probes.push_back(fill(contexts_[k], x, separator_));
    auto verdicts = oracle_.batch_query(probes);
    std::vector<std::string> still;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (verdicts[i] == expected_[k])
        still.push_back(std::move(pending[i]));
      else
        memo_[pending[i]] = false;
    }
    pending = std::move(still);
  }
  for (auto& x : pending) memo_[x] = true;
  std::vector<bool> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(!x.empty() && memo_.at(x));
  return out;
}

bool TokenOracle::member(const std::string& x) { return members({x}).front(); }

bool token_membership(Oracle& oracle, const std::string& x, const std::vector<LexContext>& contexts,
                      const std::vector<std::string>& seeds, char separator) {
  TokenOracle g(oracle, contexts, seeds, separator);
  return g.member(x);
}

ByteSet token_charset(const std::vector<std::string>& seeds) {
  ByteSet cs;
  const ByteSet letters = byte_range('a', 'z') | byte_range('A', 'Z');
  const ByteSet digits = byte_range('0', '9');
  for (const auto& s : seeds) {
    ByteSet b = bytes_of(s);
    cs |= b;
    if ((b & letters).any()) cs |= letters;
    if ((b & digits).any()) cs |= digits;
  }
  return cs;
}

EquivalenceResult approx_equivalence(const TokenDfa& hypothesis, TokenOracle& g, std::size_t sample_budget,
                                     std::uint64_t rng_seed) {
  EquivalenceResult res;
  if (!hypothesis.empty_language()) {
    std::mt19937_64 rng(rng_seed);
    std::vector<std::string> samples;
    samples.reserve(sample_budget);
    for (std::size_t i = 0; i < sample_budget; ++i) samples.push_back(hypothesis.sample(rng, 0.2, 32));
    auto verdicts = g.members(samples);
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (!verdicts[i]) {
        res.equivalent = false;
        res.counterexample = samples[i];
        return res;
      }
  }
  for (const auto& s : g.seeds())
    if (!hypothesis.accepts(s)) {
      res.equivalent = false;
      res.counterexample = s;
      return res;
    }
  return res;
}

ObservationTable::ObservationTable(std::vector<unsigned char> alphabet, Membership mq)
    : alphabet_(std::move(alphabet)), mq_(std::move(mq)), s_{""}, e_{""} {}

void ObservationTable::fill() {
  std::vector<std::string> missing;
  std::set<std::string> pending;
  auto need = [&](const std::string& w) {
    if (!cells_.count(w) && pending.insert(w).second) missing.push_back(w);
  };
  for (const auto& s : s_) {
    for (const auto& e : e_) need(s + e);
    for (unsigned char a : alphabet_)
      for (const auto& e : e_) need(s + static_cast<char>(a) + e);
  }
  if (missing.empty()) return;
  auto v = mq_(missing);
  for (std::size_t i = 0; i < missing.size(); ++i) cells_[missing[i]] = v[i];
}

std::vector<bool> ObservationTable::row(const std::string& s) const {
  std::vector<bool> r;
  r.reserve(e_.size());
  for (const auto& e : e_) r.push_back(cells_.at(s + e));
  return r;
}

std::optional<std::string> ObservationTable::unclosed() const {
  std::set<std::vector<bool>> rows;
  for (const auto& s : s_) rows.insert(row(s));
  for (const auto& s : s_)
    for (unsigned char a : alphabet_) {
      std::string sa = s + static_cast<char>(a);
      if (!rows.count(row(sa))) return sa;
    }
  return std::nullopt;
}

std::optional<std::string> ObservationTable::inconsistency() const {
  for (std::size_t i = 0; i < s_.size(); ++i)
    for (std::size_t j = i + 1; j < s_.size(); ++j) {
      if (row(s_[i]) != row(s_[j])) continue;
      for (unsigned char a : alphabet_)
        for (const auto& e : e_) {
          const std::string ae = static_cast<char>(a) + e;
          if (cells_.at(s_[i] + ae) != cells_.at(s_[j] + ae)) return ae;
        }
    }
  return std::nullopt;
}

bool ObservationTable::closed() const { return !unclosed(); }
bool ObservationTable::consistent() const { return !inconsistency(); }

void ObservationTable::complete() {
  for (;;) {
    fill();
    if (auto sa = unclosed()) {
      s_.push_back(*sa);
      continue;
    }
    if (auto ae = inconsistency()) {
      e_.push_back(*ae);
      continue;
    }
    return;
  }
}

void ObservationTable::add_counterexample(const std::string& w) {
  std::set<std::string> have(s_.begin(), s_.end());
  for (std::size_t len = 1; len <= w.size(); ++len) {
    std::string p = w.substr(0, len);
    if (have.insert(p).second) s_.push_back(p);
  }
}

TokenDfa ObservationTable::hypothesis(const ByteSet& charset) const {
  TokenDfa dfa;
  std::map<std::vector<bool>, int> state_of;
  std::vector<std::string> representative;
  for (const auto& s : s_) {
    auto r = row(s);
    if (state_of.count(r)) continue;
    int q = state_of.empty() ? dfa.start() : dfa.add_state(false);
    state_of[r] = q;
    representative.push_back(s);
    dfa.set_accepting(q, cells_.at(s));
  }
  for (std::size_t q = 0; q < representative.size(); ++q)
    for (unsigned char a : alphabet_)
      dfa.set_transition(static_cast<int>(q), a, state_of.at(row(representative[q] + static_cast<char>(a))));
  dfa.set_charset(charset);
  return dfa;
}

LearnResult learn_token_dfa(TokenOracle& g, std::uint64_t rng_seed, const LearnOptions& options) {
  const ByteSet charset = token_charset(g.seeds());
  std::vector<unsigned char> alphabet;
  for (unsigned b = 0; b < 256; ++b)
    if (charset.test(b)) alphabet.push_back(static_cast<unsigned char>(b));
  ObservationTable table(alphabet, [&](const std::vector<std::string>& ws) { return g.members(ws); });

  LearnResult res;
  for (;;) {
    table.complete();
    TokenDfa hyp = table.hypothesis(charset);
    if (res.rounds >= options.max_rounds) {
      res.final = false;
      res.dfa = hyp.canonical();
      return res;
    }
    ++res.rounds;
    auto eq = approx_equivalence(hyp, g, options.sample_budget, rng_seed + res.rounds);
    if (eq.equivalent) {
      res.dfa = hyp.canonical();
      return res;
    }
    table.add_counterexample(eq.counterexample);
  }
}

}  // namespace bbgi
