#include "bbgi/lexinf/lexinf.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "bbgi/errors.hpp"

namespace bbgi {

std::vector<LexContext> contexts_of(const Segments& sample) {
  std::vector<LexContext> out;
  out.reserve(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i)
    out.push_back({Segments(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(i)),
                   Segments(sample.begin() + static_cast<std::ptrdiff_t>(i) + 1, sample.end())});
  return out;
}

DecisionTree::DecisionTree() : nodes_(1) {}

bool DecisionTree::contains(const std::string& value) const {
  const auto& v = nodes_[0].values;
  return std::find(v.begin(), v.end(), value) != v.end();
}

void DecisionTree::classify(const std::string& value, const std::vector<LexContext>& contexts, Oracle& oracle,
                            char separator) {
  if (!contains(value)) {
    nodes_[0].values.push_back(value);
    order_.push_back(value);
  }
  update(contexts, oracle, separator);
}

void DecisionTree::update(const std::vector<LexContext>& contexts, Oracle& oracle, char separator) {
  update_node(0, contexts, oracle, separator);
}

void DecisionTree::update_node(int node, const std::vector<LexContext>& contexts, Oracle& oracle,
                               char separator) {
  auto& values = nodes_[static_cast<std::size_t>(node)].values;
  if (values.empty()) return;
  if (nodes_[static_cast<std::size_t>(node)].leaf()) {
    if (values.size() < 2) return;
    std::optional<LexContext> split;
    for (const auto& c : contexts) {
      std::vector<std::string> probes;
      for (const auto& v : values) probes.push_back(fill(c, v, separator));
      auto verdicts = oracle.batch_query(probes);
      if (std::adjacent_find(verdicts.begin(), verdicts.end(), std::not_equal_to<>()) != verdicts.end()) {
        split = c;
        break;
      }
    }
    if (!split) return;
    const int l = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    auto& n = nodes_[static_cast<std::size_t>(node)];
    n.context = std::move(split);
    n.left = l;
    n.right = l + 1;
  }
  const auto& n = nodes_[static_cast<std::size_t>(node)];
  std::vector<std::string> probes;
  for (const auto& v : n.values) probes.push_back(fill(*n.context, v, separator));
  auto verdicts = oracle.batch_query(probes);
  std::vector<std::string> left, right;
  for (std::size_t i = 0; i < n.values.size(); ++i) (verdicts[i] ? right : left).push_back(n.values[i]);
  const int l = n.left, r = n.right;
  nodes_[static_cast<std::size_t>(l)].values = std::move(left);
  nodes_[static_cast<std::size_t>(r)].values = std::move(right);
  update_node(l, contexts, oracle, separator);
  update_node(r, contexts, oracle, separator);
}

std::vector<std::vector<std::string>> DecisionTree::classes() const {
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order_.size(); ++i) rank.emplace(order_[i], i);
  std::vector<std::pair<std::size_t, std::vector<std::string>>> leaves;
  for (const auto& n : nodes_) {
    if (!n.leaf() || n.values.empty()) continue;
    std::size_t first = order_.size();
    for (const auto& v : n.values) first = std::min(first, rank.at(v));
    std::vector<std::string> vs = n.values;
    std::sort(vs.begin(), vs.end(), [&](const auto& a, const auto& b) { return rank.at(a) < rank.at(b); });
    leaves.emplace_back(first, std::move(vs));
  }
  std::sort(leaves.begin(), leaves.end());
  std::vector<std::vector<std::string>> out;
  for (auto& [_, vs] : leaves) out.push_back(std::move(vs));
  return out;
}

std::vector<std::pair<LexContext, bool>> DecisionTree::path_of(const std::string& value) const {
  std::vector<std::pair<LexContext, bool>> out;
  int node = 0;
  while (!nodes_[static_cast<std::size_t>(node)].leaf()) {
    const auto& n = nodes_[static_cast<std::size_t>(node)];
    const auto& rv = nodes_[static_cast<std::size_t>(n.right)].values;
    bool right = std::find(rv.begin(), rv.end(), value) != rv.end();
    out.emplace_back(*n.context, right);
    node = right ? n.right : n.left;
  }
  return out;
}

namespace {

std::string class_name(const TokenDfa& dfa, std::size_t index, std::set<std::string>& used) {
  std::string name = "t" + std::to_string(index);
  if (!dfa.empty_language()) {
    std::string w = dfa.shortest_accepted();
    TokenDfa lit = TokenDfa::literal(w);
    lit.set_charset(dfa.charset());
    if (lit.canonical() == dfa && !used.count(w)) name = w;
  }
  while (used.count(name)) name += "'";
  used.insert(name);
  return name;
}

}  // namespace

Lexicon build_lexicon(const DecisionTree& tree, const std::vector<LexContext>& contexts, const ByteSet& insensitive,
                      Oracle& oracle, std::uint64_t seed, const LearnOptions& options, bool* all_final) {
  Lexicon lex;
  lex.insensitive = insensitive;
  const char sep = lex.separator();
  std::set<std::string> used;
  if (all_final) *all_final = true;
  const auto classes = tree.classes();
  for (std::size_t k = 0; k < classes.size(); ++k) {
    TokenOracle g(oracle, contexts, classes[k], sep);
    auto res = learn_token_dfa(g, seed + 7919 * (k + 1), options);
    if (all_final && !res.final) *all_final = false;
    lex.classes.push_back({class_name(res.dfa, k, used), std::move(res.dfa)});
  }
  return lex;
}

namespace {

Segments pick(const Segments& lexemes, const Sample& positions) {
  Segments out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(lexemes[p]);
  return out;
}

}  // namespace

std::optional<LexCounterexample> validate_lexicon(const Lexicon& lexicon, const DecisionTree& tree,
                                                  const std::vector<std::string>& examples, Oracle& oracle,
                                                  std::uint64_t seed, const LexInferOptions& options) {
  std::mt19937_64 rng(seed);
  const char sep = lexicon.separator();
  const auto classes = tree.classes();
  for (const auto& x : examples) {
    auto tok = lexicon.tokenize(x);
    if (!tok.ok()) continue;
    Segments lexemes;
    for (const auto& t : tok.tokens) lexemes.push_back(t.lexeme);

    struct Probe {
      std::size_t position;
      std::string substitute;
    };
    std::vector<Probe> meta;
    std::vector<std::string> probes;
    for (std::size_t i = 0; i < lexemes.size(); ++i) {
      const auto cls = tok.tokens[i].cls;
      std::vector<std::string> pool;
      if (cls < classes.size())
        for (const auto& v : classes[cls])
          if (v != lexemes[i]) pool.push_back(v);
      for (std::size_t s = 0; s < options.substitutions_per_token; ++s) {
        auto w = lexicon.classes[cls].dfa.sample(rng);
        if (w != lexemes[i] && std::find(pool.begin(), pool.end(), w) == pool.end()) pool.push_back(w);
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      if (pool.size() > options.substitutions_per_token) pool.resize(options.substitutions_per_token);
      for (auto& w : pool) {
        Segments y = lexemes;
        y[i] = w;
        probes.push_back(join_lexemes(y, sep));
        meta.push_back({i, std::move(w)});
      }
    }
    const auto verdicts = oracle.batch_query(probes);
    for (std::size_t k = 0; k < probes.size(); ++k) {
      if (verdicts[k]) continue;
      const std::size_t p = meta[k].position;
      const std::string& w = meta[k].substitute;
      Predicate failing = [&](const Sample& s) {
        auto it = std::find(s.begin(), s.end(), static_cast<std::uint32_t>(p));
        if (it == s.end()) return false;
        Segments original = pick(lexemes, s);
        if (!oracle.query(join_lexemes(original, sep))) return false;
        original[static_cast<std::size_t>(it - s.begin())] = w;
        return !oracle.query(join_lexemes(original, sep));
      };
      Sample root(lexemes.size());
      for (std::size_t i = 0; i < root.size(); ++i) root[i] = static_cast<std::uint32_t>(i);
      auto res = search_min(root, failing, options.forest_budget);
      if (res.path.empty()) continue;
      LexCounterexample cex;
      cex.sample = pick(lexemes, res.sample);
      cex.position = static_cast<std::size_t>(
          std::find(res.sample.begin(), res.sample.end(), static_cast<std::uint32_t>(p)) - res.sample.begin());
      cex.substitute = w;
      return cex;
    }
  }
  return std::nullopt;
}

namespace {

class ContextSet {
 public:
  void add(const Segments& sample) {
    for (auto& c : contexts_of(sample))
      if (seen_.insert(c).second) list_.push_back(std::move(c));
  }
  const std::vector<LexContext>& list() const { return list_; }

 private:
  std::set<LexContext> seen_;
  std::vector<LexContext> list_;
};

}  // namespace

LexInferResult infer_lexicon(const std::vector<std::string>& examples, Oracle& oracle, std::uint64_t seed,
                             const LexInferOptions& options) {
  if (examples.empty()) throw EmptyCorpus("no training examples");
  LexInferResult res;
  SegmentationRules rules{discover_insensitive(examples, oracle)};
  res.lexicon.insensitive = rules.insensitive;
  const char sep = res.lexicon.separator();

  std::map<std::string, std::uint32_t> ids;
  std::vector<std::string> value_of;
  auto intern = [&](const std::string& s) {
    auto [it, fresh] = ids.emplace(s, static_cast<std::uint32_t>(value_of.size()));
    if (fresh) value_of.push_back(s);
    return it->second;
  };

  ContextSet contexts;
  auto incorporate = [&](const Segments& sample) {
    res.short_samples.push_back(sample);
    contexts.add(sample);
    for (const auto& v : sample) res.tree.classify(v, contexts.list(), oracle, sep);
  };

  for (const auto& x : examples) {
    Segments segs = refine_boundaries(x, rules, oracle);
    Sample root;
    for (const auto& s : segs) root.push_back(intern(s));
    Predicate uncovered = [&](const Sample& s) {
      bool fresh = std::any_of(s.begin(), s.end(), [&](auto u) { return !res.tree.contains(value_of[u]); });
      if (!fresh) return false;
      Segments parts;
      for (auto u : s) parts.push_back(value_of[u]);
      return oracle.query(join_lexemes(parts, sep));
    };
    while (std::any_of(root.begin(), root.end(), [&](auto u) { return !res.tree.contains(value_of[u]); })) {
      auto found = search_min(root, uncovered, options.forest_budget);
      if (found.path.empty()) {
        res.complete = false;
        break;
      }
      Segments sample;
      for (auto u : found.sample) sample.push_back(value_of[u]);
      incorporate(sample);
    }
  }

  std::size_t last_leaves = res.tree.classes().size();
  std::size_t last_contexts = contexts.list().size();
  for (;;) {
    bool final = true;
    res.lexicon = build_lexicon(res.tree, contexts.list(), rules.insensitive, oracle, seed + res.validation_rounds,
                                options.lstar, &final);
    if (!final) res.complete = false;
    auto cex = validate_lexicon(res.lexicon, res.tree, examples, oracle, seed * 31 + res.validation_rounds, options);
    if (!cex) break;
    if (res.validation_rounds >= options.max_validation_rounds) {
      res.complete = false;
      break;
    }
    ++res.validation_rounds;
    res.counterexamples.push_back(*cex);
    incorporate(cex->sample);
    const std::size_t leaves = res.tree.classes().size();
    if (leaves == last_leaves && contexts.list().size() == last_contexts) {
      res.complete = false;
      break;
    }
    last_leaves = leaves;
    last_contexts = contexts.list().size();
  }
  for (const auto& x : examples)
    if (!res.lexicon.tokenize(x).ok()) res.complete = false;
  return res;
}

}  // namespace bbgi
