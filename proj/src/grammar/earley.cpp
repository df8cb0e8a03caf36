#include "bbgi/grammar/earley.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace bbgi {

std::vector<std::uint32_t> ParseTree::leaf_classes() const {
  std::vector<std::uint32_t> out;
  std::vector<const ParseTree*> stack{this};
  while (!stack.empty()) {
    const ParseTree* t = stack.back();
    stack.pop_back();
    if (t->is_token()) {
      out.push_back(t->id);
      continue;
    }
    for (auto it = t->children.rbegin(); it != t->children.rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

std::vector<std::string> ParseTree::leaf_lexemes() const {
  std::vector<std::string> out;
  std::vector<const ParseTree*> stack{this};
  while (!stack.empty()) {
    const ParseTree* t = stack.back();
    stack.pop_back();
    if (t->is_token()) {
      out.push_back(t->lexeme);
      continue;
    }
    for (auto it = t->children.rbegin(); it != t->children.rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

Clock::time_point deadline_after(double seconds) {
  if (!std::isfinite(seconds)) return Clock::time_point::max();
  auto now = Clock::now();
  auto span = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
  if (Clock::time_point::max() - now < span) return Clock::time_point::max();
  return now + span;
}

struct Item {
  std::uint32_t rule;
  std::uint32_t dot;
  std::uint32_t origin;
};

std::uint64_t pack(std::uint32_t rule, std::uint32_t dot, std::uint32_t origin) {
  return (static_cast<std::uint64_t>(rule) << 40) | (static_cast<std::uint64_t>(dot) << 24) | origin;
}

}  // namespace

struct EarleyParser::Chart {
  struct Set {
    std::vector<Item> items;
    std::unordered_set<std::uint64_t> seen;
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> waiting;
    std::unordered_set<std::uint32_t> predicted;
  };
  std::vector<Set> sets;

  bool add(std::size_t k, std::uint32_t rule, std::uint32_t dot, std::uint32_t origin) {
    if (!sets[k].seen.insert(pack(rule, dot, origin)).second) return false;
    sets[k].items.push_back({rule, dot, origin});
    return true;
  }
  bool has(std::size_t k, std::uint32_t rule, std::uint32_t dot, std::uint32_t origin) const {
    return sets[k].seen.count(pack(rule, dot, origin)) > 0;
  }
};

EarleyParser::EarleyParser(Grammar g) : grammar_(std::move(g)) {
  const std::size_t n = grammar_.nonterminals.size();
  rules_of_.assign(n, {});
  for (std::uint32_t r = 0; r < grammar_.rules.size(); ++r) rules_of_[grammar_.rules[r].lhs].push_back(r);
  nullable_.assign(n, false);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : grammar_.rules) {
      if (nullable_[r.lhs]) continue;
      bool all = true;
      for (const auto& s : r.rhs)
        if (s.terminal || !nullable_[s.id]) {
          all = false;
          break;
        }
      if (all) {
        nullable_[r.lhs] = true;
        changed = true;
      }
    }
  }
}

ParseStatus EarleyParser::run_chart(const std::vector<std::uint32_t>& tokens,
                                    Clock::time_point deadline, Chart& chart) const {
  const std::size_t n = tokens.size();
  chart.sets.assign(n + 1, {});
  if (grammar_.start >= grammar_.nonterminals.size()) return ParseStatus::NoParse;
  for (auto r : rules_of_[grammar_.start]) chart.add(0, r, 0, 0);
  std::size_t work = 0;
  const bool timed = deadline != Clock::time_point::max();

  for (std::size_t k = 0; k <= n; ++k) {
    if (k == 0) chart.sets[0].predicted.insert(grammar_.start);
    for (std::size_t i = 0; i < chart.sets[k].items.size(); ++i) {
      if (timed && (++work & 1023u) == 0 && Clock::now() > deadline) return ParseStatus::Timeout;
      const Item it = chart.sets[k].items[i];
      const Rule& rule = grammar_.rules[it.rule];
      if (it.dot == rule.rhs.size()) {
        const std::uint32_t lhs = rule.lhs;
        auto& origin_set = chart.sets[it.origin];
        auto w = origin_set.waiting.find(lhs);
        if (w == origin_set.waiting.end()) continue;
        for (std::size_t j = 0; j < w->second.size(); ++j) {
          const Item parent = chart.sets[it.origin].items[w->second[j]];
          chart.add(k, parent.rule, parent.dot + 1, parent.origin);
        }
        continue;
      }
      const Symbol next = rule.rhs[it.dot];
      if (next.terminal) {
        if (k < n && tokens[k] == next.id) chart.add(k + 1, it.rule, it.dot + 1, it.origin);
        continue;
      }
      chart.sets[k].waiting[next.id].push_back(static_cast<std::uint32_t>(i));
      if (chart.sets[k].predicted.insert(next.id).second)
        for (auto r : rules_of_[next.id]) chart.add(k, r, 0, static_cast<std::uint32_t>(k));
      if (nullable_[next.id]) chart.add(k, it.rule, it.dot + 1, it.origin);
    }
  }
  for (auto r : rules_of_[grammar_.start])
    if (chart.has(n, r, static_cast<std::uint32_t>(grammar_.rules[r].rhs.size()), 0))
      return ParseStatus::Parsed;
  return ParseStatus::NoParse;
}

namespace {

struct TreeBuilder {
  const Grammar& g;
  const std::vector<std::vector<std::uint32_t>>& rules_of;
  const std::vector<std::uint32_t>& tokens;
  const std::vector<std::string>* lexemes;
  const std::function<bool(std::size_t, std::uint32_t, std::uint32_t, std::uint32_t)>& has;
  Clock::time_point deadline;
  bool timed_out = false;
  std::set<std::tuple<std::uint32_t, std::size_t, std::size_t>> active;
  std::size_t steps = 0;

  bool derives(std::uint32_t a, std::size_t i, std::size_t j) const {
    for (auto r : rules_of[a])
      if (has(j, r, static_cast<std::uint32_t>(g.rules[r].rhs.size()), static_cast<std::uint32_t>(i)))
        return true;
    return false;
  }

  bool out_of_time() {
    if (timed_out) return true;
    if (deadline != Clock::time_point::max() && (++steps & 255u) == 0 && Clock::now() > deadline)
      timed_out = true;
    return timed_out;
  }

  std::optional<ParseTree> build(std::uint32_t a, std::size_t i, std::size_t j) {
    if (out_of_time()) return std::nullopt;
    auto key = std::make_tuple(a, i, j);
    if (!active.insert(key).second) return std::nullopt;
    std::optional<ParseTree> result;
    for (auto r : rules_of[a]) {
      const auto len = static_cast<std::uint32_t>(g.rules[r].rhs.size());
      if (!has(j, r, len, static_cast<std::uint32_t>(i))) continue;
      std::vector<ParseTree> kids;
      if (split(r, len, i, j, kids)) {
        ParseTree t;
        t.kind = ParseTree::Kind::Nonterminal;
        t.id = a;
        t.rule = static_cast<int>(r);
        t.begin = i;
        t.end = j;
        t.children = std::move(kids);
        result = std::move(t);
        break;
      }
      if (timed_out) break;
    }
    active.erase(key);
    return result;
  }

  // Fills `kids` with subtrees for rhs[0..dot) spanning [i, e).
  bool split(std::uint32_t r, std::uint32_t dot, std::size_t i, std::size_t e,
             std::vector<ParseTree>& kids) {
    if (dot == 0) return e == i;
    if (out_of_time()) return false;
    const Symbol x = g.rules[r].rhs[dot - 1];
    if (x.terminal) {
      if (e == i || e == 0) return false;
      const std::size_t k = e - 1;
      if (tokens[k] != x.id || !has(k, r, dot - 1, static_cast<std::uint32_t>(i))) return false;
      if (!split(r, dot - 1, i, k, kids)) return false;
      ParseTree leaf;
      leaf.kind = ParseTree::Kind::Token;
      leaf.id = x.id;
      leaf.begin = k;
      leaf.end = e;
      if (lexemes != nullptr) leaf.lexeme = (*lexemes)[k];
      kids.push_back(std::move(leaf));
      return true;
    }
    for (std::size_t k = e + 1; k-- > i;) {
      if (!has(k, r, dot - 1, static_cast<std::uint32_t>(i)) || !derives(x.id, k, e)) continue;
      std::optional<ParseTree> sub = build(x.id, k, e);
      if (!sub) {
        if (timed_out) return false;
        continue;
      }
      const std::size_t mark = kids.size();
      if (split(r, dot - 1, i, k, kids)) {
        kids.push_back(std::move(*sub));
        return true;
      }
      kids.resize(mark);
      if (timed_out) return false;
    }
    return false;
  }
};

}  // namespace

ParseResult EarleyParser::parse(const std::vector<std::uint32_t>& tokens, double timeout_seconds,
                                const std::vector<std::string>* lexemes) const {
  ParseResult out;
  const auto deadline = deadline_after(timeout_seconds);
  Chart chart;
  out.status = run_chart(tokens, deadline, chart);
  if (out.status != ParseStatus::Parsed) return out;
  std::function<bool(std::size_t, std::uint32_t, std::uint32_t, std::uint32_t)> has =
      [&chart](std::size_t k, std::uint32_t r, std::uint32_t d, std::uint32_t o) {
        return chart.has(k, r, d, o);
      };
  TreeBuilder b{grammar_, rules_of_, tokens, lexemes, has, deadline, false, {}, 0};
  auto tree = b.build(grammar_.start, 0, tokens.size());
  if (b.timed_out) {
    out.status = ParseStatus::Timeout;
    return out;
  }
  if (!tree) {
    out.status = ParseStatus::NoParse;
    return out;
  }
  out.tree = std::move(*tree);
  return out;
}

ParseStatus EarleyParser::recognize(const std::vector<std::uint32_t>& tokens,
                                    double timeout_seconds) const {
  Chart chart;
  return run_chart(tokens, deadline_after(timeout_seconds), chart);
}

bool EarleyParser::accepts(const std::vector<std::uint32_t>& tokens, double timeout_seconds) const {
  return recognize(tokens, timeout_seconds) == ParseStatus::Parsed;
}

ParseResult parse(const Grammar& g, const std::vector<std::uint32_t>& tokens, double timeout_seconds) {
  return EarleyParser(g).parse(tokens, timeout_seconds);
}

bool accepts(const Grammar& g, const std::vector<std::uint32_t>& tokens, double timeout_seconds) {
  return EarleyParser(g).accepts(tokens, timeout_seconds);
}

}  // namespace bbgi
