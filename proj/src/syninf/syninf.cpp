#include "bbgi/syninf/syninf.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>

#include "bbgi/grammar/earley.hpp"

namespace bbgi {

Sample fill(const SynContext& context, const Sample& sub) {
  Sample out = context.prefix;
  out.insert(out.end(), sub.begin(), sub.end());
  out.insert(out.end(), context.suffix.begin(), context.suffix.end());
  return out;
}

Renderer Renderer::canonical(const Lexicon& lexicon) { return {lexicon.canonical_lexemes(), lexicon.separator()}; }

std::string Renderer::operator()(const Sample& classes) const { return render_classes(classes, lexeme_of, separator); }

// ---------------------------------------------------------------------------
// Matrix

DistributionalMatrix::DistributionalMatrix(std::vector<Sample> rows, std::vector<SynContext> cols)
    : rows_(std::move(rows)), cols_(std::move(cols)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) row_index_.emplace(rows_[i], i);
  for (std::size_t j = 0; j < cols_.size(); ++j) col_index_.emplace(cols_[j], j);
  bits_.assign(rows_.size(), std::vector<std::uint64_t>((cols_.size() + 63) / 64, 0));
}

std::optional<std::size_t> DistributionalMatrix::row(const Sample& sub) const {
  auto it = row_index_.find(sub);
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> DistributionalMatrix::col(const SynContext& con) const {
  auto it = col_index_.find(con);
  if (it == col_index_.end()) return std::nullopt;
  return it->second;
}

void DistributionalMatrix::set(std::size_t r, std::size_t c, bool v) {
  const std::uint64_t bit = std::uint64_t{1} << (c & 63);
  if (v)
    bits_[r][c >> 6] |= bit;
  else
    bits_[r][c >> 6] &= ~bit;
}

bool DistributionalMatrix::lookup(const Sample& sub, const SynContext& con) const {
  auto r = row(sub);
  auto c = col(con);
  return r && c && at(*r, *c);
}

bool DistributionalMatrix::covers(std::size_t r, const std::vector<std::uint64_t>& mask) const {
  const auto& row = bits_[r];
  for (std::size_t w = 0; w < mask.size(); ++w)
    if ((row[w] & mask[w]) != mask[w]) return false;
  return true;
}

std::vector<std::uint64_t> DistributionalMatrix::column_mask(const std::vector<std::size_t>& cols) const {
  std::vector<std::uint64_t> mask((cols_.size() + 63) / 64, 0);
  for (auto c : cols) mask[c >> 6] |= std::uint64_t{1} << (c & 63);
  return mask;
}

namespace {

void substrings_and_contexts(const std::vector<Sample>& examples, std::vector<Sample>& rows,
                             std::vector<SynContext>& cols) {
  std::set<Sample> seen_rows;
  std::set<SynContext> seen_cols;
  for (const auto& x : examples) {
    const auto n = x.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j <= n; ++j) {
        Sample sub(x.begin() + static_cast<std::ptrdiff_t>(i), x.begin() + static_cast<std::ptrdiff_t>(j));
        if (seen_rows.insert(sub).second) rows.push_back(std::move(sub));
        SynContext con{Sample(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(i)),
                       Sample(x.begin() + static_cast<std::ptrdiff_t>(j), x.end())};
        if (seen_cols.insert(con).second) cols.push_back(std::move(con));
      }
  }
}

DistributionalMatrix build_matrix_from(const std::vector<Sample>& examples, Oracle& oracle, const Renderer& render,
                                       const DistributionalMatrix* previous) {
  std::vector<Sample> rows;
  std::vector<SynContext> cols;
  substrings_and_contexts(examples, rows, cols);
  DistributionalMatrix m(std::move(rows), std::move(cols));

  std::vector<std::optional<std::size_t>> old_col(m.col_count());
  if (previous)
    for (std::size_t c = 0; c < m.col_count(); ++c) old_col[c] = previous->col(m.cols()[c]);

  std::vector<std::string> probes;
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  auto flush = [&] {
    if (probes.empty()) return;
    auto verdicts = oracle.batch_query(probes);
    for (std::size_t k = 0; k < cells.size(); ++k) m.set(cells[k].first, cells[k].second, verdicts[k]);
    probes.clear();
    cells.clear();
  };
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    std::optional<std::size_t> old_row = previous ? previous->row(m.rows()[r]) : std::nullopt;
    for (std::size_t c = 0; c < m.col_count(); ++c) {
      if (old_row && old_col[c]) {
        m.set(r, c, previous->at(*old_row, *old_col[c]));
        continue;
      }
      probes.push_back(render(fill(m.cols()[c], m.rows()[r])));
      cells.emplace_back(r, c);
    }
    if (probes.size() >= 4096) flush();
  }
  flush();
  return m;
}

}  // namespace

DistributionalMatrix build_matrix(const std::vector<Sample>& examples, Oracle& oracle, const Renderer& render) {
  return build_matrix_from(examples, oracle, render, nullptr);
}

// ---------------------------------------------------------------------------
// Trees

namespace {

std::size_t annotate_node(SynNode& node, std::size_t offset) {
  node.begin = offset;
  if (node.terminal) {
    node.end = offset + 1;
    return node.end;
  }
  for (auto& c : node.children) offset = annotate_node(c, offset);
  node.end = offset;
  return offset;
}

}  // namespace

void annotate(SynTree& tree) { annotate_node(tree.root, 0); }

SynTree flat_tree(const Sample& sample) {
  SynTree t;
  t.sample = sample;
  t.root.id = kStartSymbol;
  for (auto cls : sample) t.root.children.push_back(SynNode{true, cls, {}, 0, 0});
  annotate(t);
  return t;
}

std::vector<SynTree> flat_trees(const std::vector<Sample>& samples) {
  std::vector<SynTree> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(flat_tree(s));
  return out;
}

const SynNode& node_at(const std::vector<SynTree>& trees, std::size_t tree, const std::vector<std::size_t>& path) {
  const SynNode* n = &trees[tree].root;
  for (auto i : path) n = &n->children[i];
  return *n;
}

namespace {

SynNode& node_at(std::vector<SynTree>& trees, std::size_t tree, const std::vector<std::size_t>& path) {
  SynNode* n = &trees[tree].root;
  for (auto i : path) n = &n->children[i];
  return *n;
}

Sample slice(const Sample& s, std::size_t b, std::size_t e) {
  return Sample(s.begin() + static_cast<std::ptrdiff_t>(b), s.begin() + static_cast<std::ptrdiff_t>(e));
}

SynContext around(const Sample& s, std::size_t b, std::size_t e) {
  return {slice(s, 0, b), slice(s, e, s.size())};
}

template <class F>
void visit_nonterminals(const SynNode& node, std::vector<std::size_t>& path, F&& f) {
  if (node.terminal) return;
  f(node, path);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(i);
    visit_nonterminals(node.children[i], path, f);
    path.pop_back();
  }
}

}  // namespace

std::optional<std::uint32_t> bubble_nonterminal(const std::vector<SynTree>& trees, const BubbleRef& b) {
  if (b.end != b.begin + 1) return std::nullopt;
  const auto& child = node_at(trees, b.tree, b.path).children[b.begin];
  if (child.terminal) return std::nullopt;
  return child.id;
}

std::vector<BubbleRef> enumerate_bubbles(const std::vector<SynTree>& trees, const BubbleOptions& options) {
  std::vector<BubbleRef> out;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    std::vector<std::size_t> path;
    visit_nonterminals(trees[t].root, path, [&](const SynNode& node, const std::vector<std::size_t>& p) {
      const std::size_t k = node.children.size();
      const bool root = p.empty();
      std::size_t max_len = root ? k : (k == 0 ? 0 : k - 1);
      if (k > options.full_span_children) max_len = std::min(max_len, options.max_span);
      for (std::size_t b = 0; b < k; ++b)
        for (std::size_t e = b + 1; e <= k && e - b <= max_len; ++e) out.push_back({t, p, b, e});
    });
  }
  return out;
}

std::map<std::uint32_t, BubbleProfile> nonterminal_profiles(const std::vector<SynTree>& trees) {
  std::map<std::uint32_t, BubbleProfile> out;
  for (const auto& tree : trees) {
    std::vector<std::size_t> path;
    visit_nonterminals(tree.root, path, [&](const SynNode& node, const std::vector<std::size_t>&) {
      auto& p = out[node.id];
      p.sub.insert(slice(tree.sample, node.begin, node.end));
      p.con.insert(around(tree.sample, node.begin, node.end));
    });
  }
  return out;
}

namespace {

// Contexts of a span [from, to) of `parent`'s yield. Inside a nonterminal the
// span is seen in every context of that nonterminal.
class ProfileBuilder {
 public:
  ProfileBuilder(const std::vector<SynTree>& trees, const BubbleOptions& options)
      : trees_(trees), parent_contexts_(options.parent_contexts), literal_(nonterminal_profiles(trees)) {
    for (const auto& tree : trees) walk(tree, tree.root, true);
  }

  BubbleProfile operator()(const BubbleRef& b) const {
    if (auto nt = bubble_nonterminal(trees_, b)) return extended_.at(*nt);
    const auto& tree = trees_[b.tree];
    const auto& parent = node_at(trees_, b.tree, b.path);
    const std::size_t from = parent.children[b.begin].begin;
    const std::size_t to = parent.children[b.end - 1].end;
    BubbleProfile p;
    p.sub.insert(slice(tree.sample, from, to));
    contexts(tree, parent, b.path.empty(), from, to, p.con);
    return p;
  }

 private:
  const std::vector<SynTree>& trees_;
  bool parent_contexts_;
  std::map<std::uint32_t, BubbleProfile> literal_;
  std::map<std::uint32_t, BubbleProfile> extended_;

  void contexts(const SynTree& tree, const SynNode& parent, bool root, std::size_t from, std::size_t to,
                std::set<SynContext>& out) const {
    if (root || !parent_contexts_) {
      out.insert(around(tree.sample, from, to));
      return;
    }
    const Sample left = slice(tree.sample, parent.begin, from);
    const Sample right = slice(tree.sample, to, parent.end);
    for (const auto& c : literal_.at(parent.id).con) {
      SynContext k{c.prefix, right};
      k.prefix.insert(k.prefix.end(), left.begin(), left.end());
      k.suffix.insert(k.suffix.end(), c.suffix.begin(), c.suffix.end());
      out.insert(std::move(k));
    }
  }

  void walk(const SynTree& tree, const SynNode& node, bool root) {
    for (const auto& c : node.children) {
      if (c.terminal) continue;
      auto& p = extended_[c.id];
      p.sub.insert(slice(tree.sample, c.begin, c.end));
      contexts(tree, node, root, c.begin, c.end, p.con);
      walk(tree, c, false);
    }
  }
};

}  // namespace

BubbleProfile bubble_profile(const std::vector<SynTree>& trees, const BubbleRef& bubble,
                             const BubbleOptions& options) {
  return ProfileBuilder(trees, options)(bubble);
}

// ---------------------------------------------------------------------------
// Swap graph

bool SwapGraph::edge(std::size_t u, std::size_t v) const {
  if (u == v) return false;
  return group_edge[group_of[u]][group_of[v]];
}

std::size_t SwapGraph::edge_count() const {
  std::size_t n = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::size_t k = groups[g].size();
    if (group_edge[g][g]) n += k * (k - 1) / 2;
    for (std::size_t h = g + 1; h < groups.size(); ++h)
      if (group_edge[g][h]) n += k * groups[h].size();
  }
  return n;
}

SwapGraph build_swap_graph(const DistributionalMatrix& matrix, const std::vector<SynTree>& trees,
                           const BubbleOptions& options) {
  SwapGraph g;
  g.bubbles = enumerate_bubbles(trees, options);
  const ProfileBuilder profile(trees, options);

  std::map<std::pair<std::set<Sample>, std::set<SynContext>>, std::size_t> group_index;
  for (const auto& b : g.bubbles) {
    BubbleProfile p = profile(b);
    auto key = std::make_pair(p.sub, p.con);
    auto [it, fresh] = group_index.emplace(std::move(key), g.groups.size());
    if (fresh) g.groups.emplace_back();
    g.groups[it->second].push_back(g.group_of.size());
    g.group_of.push_back(it->second);
    g.profiles.push_back(std::move(p));
  }

  const std::size_t n = g.groups.size();
  std::vector<std::vector<std::size_t>> rows(n);
  std::vector<std::vector<std::uint64_t>> masks(n);
  std::vector<bool> present(n, true);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = g.profiles[g.groups[k].front()];
    for (const auto& s : p.sub) {
      if (auto r = matrix.row(s))
        rows[k].push_back(*r);
      else
        present[k] = false;
    }
    std::vector<std::size_t> cols;
    for (const auto& c : p.con) {
      if (auto j = matrix.col(c))
        cols.push_back(*j);
      else
        present[k] = false;
    }
    masks[k] = matrix.column_mask(cols);
  }
  auto rows_cover = [&](std::size_t a, std::size_t b) {
    for (auto r : rows[a])
      if (!matrix.covers(r, masks[b])) return false;
    return true;
  };
  g.group_edge.assign(n, std::vector<bool>(n, false));
  std::vector<bool> self(n);
  for (std::size_t k = 0; k < n; ++k) {
    self[k] = present[k] && rows_cover(k, k);
    g.group_edge[k][k] = self[k];
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (!self[a]) continue;
    for (std::size_t b = a + 1; b < n; ++b)
      if (self[b] && rows_cover(a, b) && rows_cover(b, a)) g.group_edge[a][b] = g.group_edge[b][a] = true;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Cliques

namespace {

struct CliqueSearch {
  const std::vector<std::vector<bool>>& adj;
  std::size_t budget;
  std::size_t calls = 0;
  bool exhausted = false;
  std::vector<std::vector<std::size_t>> found;

  void run(std::vector<std::size_t>& r, std::vector<std::size_t> p, std::vector<std::size_t> x) {
    if (++calls > budget) {
      exhausted = true;
      return;
    }
    if (p.empty()) {
      if (x.empty()) found.push_back(r);
      return;
    }
    auto degree = [&](std::size_t u) {
      std::size_t d = 0;
      for (auto v : p) d += u != v && adj[u][v];
      return d;
    };
    std::size_t pivot = p.front(), best = degree(pivot);
    for (const auto* set : {&p, &x})
      for (auto u : *set)
        if (auto d = degree(u); d > best) best = d, pivot = u;
    std::vector<std::size_t> candidates;
    for (auto v : p)
      if (v == pivot || !adj[pivot][v]) candidates.push_back(v);
    for (auto v : candidates) {
      if (exhausted) return;
      std::vector<std::size_t> np, nx;
      for (auto w : p)
        if (w != v && adj[v][w]) np.push_back(w);
      for (auto w : x)
        if (w != v && adj[v][w]) nx.push_back(w);
      r.push_back(v);
      run(r, std::move(np), std::move(nx));
      r.pop_back();
      p.erase(std::find(p.begin(), p.end(), v));
      x.push_back(v);
    }
  }
};

}  // namespace

CliqueEnumeration maximal_cliques(const SwapGraph& graph, std::size_t budget) {
  CliqueEnumeration out;
  const std::size_t n = graph.groups.size();
  std::vector<std::size_t> live;
  for (std::size_t k = 0; k < n; ++k)
    if (graph.group_edge[k][k]) live.push_back(k);

  CliqueSearch search{graph.group_edge, budget, 0, false, {}};
  std::vector<std::size_t> r;
  search.run(r, live, {});
  std::vector<std::vector<std::size_t>> group_cliques = std::move(search.found);
  if (search.exhausted) {
    out.complete = false;
    std::vector<bool> covered(n, false);
    for (const auto& c : group_cliques)
      for (auto v : c) covered[v] = true;
    for (auto v : live) {
      if (covered[v]) continue;
      std::vector<std::size_t> c{v};
      for (auto w : live)
        if (w != v && std::all_of(c.begin(), c.end(), [&](auto u) { return graph.group_edge[u][w]; }))
          c.push_back(w);
      for (auto u : c) covered[u] = true;
      group_cliques.push_back(std::move(c));
    }
  }
  // Groups with no self-loop stand alone; every bubble is in some maximal clique.
  for (std::size_t k = 0; k < n; ++k)
    if (!graph.group_edge[k][k])
      for (auto b : graph.groups[k]) out.cliques.push_back({b});

  std::set<std::vector<std::size_t>> seen;
  for (const auto& gc : group_cliques) {
    std::vector<std::size_t> bubbles;
    for (auto k : gc) bubbles.insert(bubbles.end(), graph.groups[k].begin(), graph.groups[k].end());
    std::sort(bubbles.begin(), bubbles.end());
    if (seen.insert(bubbles).second) out.cliques.push_back(std::move(bubbles));
  }
  std::sort(out.cliques.begin(), out.cliques.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Grammar

namespace {

Grammar raw_grammar(const std::vector<SynTree>& trees, const std::vector<std::string>& terminal_names) {
  Grammar g;
  g.terminals = terminal_names;
  std::map<std::uint32_t, std::uint32_t> index;
  auto nt = [&](std::uint32_t id) {
    auto it = index.find(id);
    if (it != index.end()) return it->second;
    auto k = g.add_nonterminal(id == kStartSymbol ? "start" : "n" + std::to_string(id));
    index.emplace(id, k);
    return k;
  };
  g.start = nt(kStartSymbol);
  std::set<Rule> seen;
  for (const auto& tree : trees) {
    std::vector<std::size_t> path;
    visit_nonterminals(tree.root, path, [&](const SynNode& node, const std::vector<std::size_t>&) {
      Rule rule{nt(node.id), {}};
      for (const auto& c : node.children) rule.rhs.push_back(c.terminal ? Symbol::t(c.id) : Symbol::nt(nt(c.id)));
      if (seen.insert(rule).second) g.rules.push_back(std::move(rule));
    });
  }
  return g;
}

}  // namespace

Grammar to_grammar(const std::vector<SynTree>& trees, const std::vector<std::string>& terminal_names) {
  Grammar g = raw_grammar(trees, terminal_names);
  if (g.rules.empty()) return g;
  return normalize(g);
}

// ---------------------------------------------------------------------------
// Merging

std::uint32_t next_nonterminal(const std::vector<SynTree>& trees) {
  std::uint32_t top = kStartSymbol;
  for (const auto& tree : trees) {
    std::vector<std::size_t> path;
    visit_nonterminals(tree.root, path,
                       [&](const SynNode& node, const std::vector<std::size_t>&) { top = std::max(top, node.id); });
  }
  return top + 1;
}

namespace {

void rename(SynNode& node, const std::set<std::uint32_t>& from, std::uint32_t to) {
  if (node.terminal) return;
  if (from.count(node.id)) node.id = to;
  for (auto& c : node.children) rename(c, from, to);
}

struct Span {
  std::size_t begin, end;
};

void wrap_spans(SynNode& parent, std::vector<Span> spans, std::uint32_t target) {
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    if (a.end - a.begin != b.end - b.begin) return a.end - a.begin < b.end - b.begin;
    return a.begin < b.begin;
  });
  std::vector<Span> done;
  // Outermost wrapped spans; each now occupies a single child.
  std::vector<Span> top;
  for (const auto& s : spans) {
    bool ok = true;
    for (const auto& d : done) {
      const bool disjoint = d.end <= s.begin || s.end <= d.begin;
      const bool inside = s.begin <= d.begin && d.end <= s.end;
      const bool equal = s.begin == d.begin && s.end == d.end;
      if (equal || (!disjoint && !inside)) ok = false;
    }
    if (!ok) continue;
    std::size_t b = s.begin, e = s.end;
    for (const auto& d : top) {
      const std::size_t shrink = d.end - d.begin - 1;
      if (d.end <= s.begin) b -= shrink, e -= shrink;
      else if (d.end <= s.end) e -= shrink;
    }
    done.push_back(s);
    std::erase_if(top, [&](const Span& d) { return s.begin <= d.begin && d.end <= s.end; });
    top.push_back(s);
    if (e - b == 1 && !parent.children[b].terminal && parent.children[b].id == target) continue;
    SynNode wrapped;
    wrapped.id = target;
    wrapped.children.assign(std::make_move_iterator(parent.children.begin() + static_cast<std::ptrdiff_t>(b)),
                            std::make_move_iterator(parent.children.begin() + static_cast<std::ptrdiff_t>(e)));
    parent.children.erase(parent.children.begin() + static_cast<std::ptrdiff_t>(b),
                          parent.children.begin() + static_cast<std::ptrdiff_t>(e));
    parent.children.insert(parent.children.begin() + static_cast<std::ptrdiff_t>(b), std::move(wrapped));
  }
}

}  // namespace

void merge_bubbles(std::vector<SynTree>& trees, const SwapGraph& graph, const std::vector<std::size_t>& clique,
                   std::uint32_t target) {
  std::set<std::uint32_t> renamed;
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::vector<Span>> literal;
  for (auto i : clique) {
    const auto& b = graph.bubbles[i];
    if (auto nt = bubble_nonterminal(trees, b)) {
      if (*nt != target) renamed.insert(*nt);
    } else {
      literal[{b.tree, b.path}].push_back({b.begin, b.end});
    }
  }
  // Deeper parents first: wrapping never moves an ancestor's children.
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> parents;
  for (const auto& [key, _] : literal) parents.push_back(key);
  std::stable_sort(parents.begin(), parents.end(),
                   [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });
  for (const auto& key : parents) wrap_spans(node_at(trees, key.first, key.second), literal.at(key), target);
  if (!renamed.empty())
    for (auto& t : trees) rename(t.root, renamed, target);
  for (auto& t : trees) annotate(t);
}

namespace {

std::vector<Sample> witness_candidates(const SwapGraph& graph, const std::vector<std::size_t>& clique,
                                       std::mt19937_64& rng, std::size_t cap) {
  std::set<Sample> subs;
  std::set<SynContext> cons;
  for (auto i : clique) {
    subs.insert(graph.profiles[i].sub.begin(), graph.profiles[i].sub.end());
    cons.insert(graph.profiles[i].con.begin(), graph.profiles[i].con.end());
  }
  const std::vector<Sample> sv(subs.begin(), subs.end());
  const std::vector<SynContext> cv(cons.begin(), cons.end());
  const std::size_t total = sv.size() * cv.size();
  std::vector<std::size_t> picks;
  if (total <= cap) {
    picks.resize(total);
    for (std::size_t k = 0; k < total; ++k) picks[k] = k;
  } else {
    std::set<std::size_t> chosen;
    std::uniform_int_distribution<std::size_t> dist(0, total - 1);
    while (chosen.size() < cap) {
      auto k = dist(rng);
      if (chosen.insert(k).second) picks.push_back(k);
    }
  }
  std::vector<Sample> out;
  out.reserve(picks.size());
  for (auto k : picks) out.push_back(fill(cv[k % cv.size()], sv[k / cv.size()]));
  return out;
}

}  // namespace

std::vector<Sample> matrix_negatives(const DistributionalMatrix& matrix) {
  std::set<Sample> seen;
  std::vector<Sample> out;
  for (std::size_t r = 0; r < matrix.row_count(); ++r)
    for (std::size_t c = 0; c < matrix.col_count(); ++c) {
      if (matrix.at(r, c)) continue;
      Sample s = fill(matrix.cols()[c], matrix.rows()[r]);
      if (seen.insert(s).second) out.push_back(std::move(s));
    }
  std::stable_sort(out.begin(), out.end(), [](const Sample& a, const Sample& b) { return a.size() < b.size(); });
  return out;
}

MergeReport select_and_merge(const SwapGraph& graph, std::vector<SynTree>& trees, std::size_t terminal_count,
                             std::uint64_t seed, const MergeOptions& options, const std::vector<Sample>* negatives) {
  MergeReport report;
  auto cliques = maximal_cliques(graph, options.clique_budget);
  report.enumeration_complete = cliques.complete;

  std::vector<std::string> names(terminal_count);
  for (std::size_t i = 0; i < terminal_count; ++i) names[i] = "t" + std::to_string(i);
  EarleyParser parser(raw_grammar(trees, names));
  std::map<Sample, bool> parsed;
  auto covered = [&](const Sample& s) {
    auto it = parsed.find(s);
    if (it != parsed.end()) return it->second;
    bool ok = parser.accepts(s);
    parsed.emplace(s, ok);
    return ok;
  };

  // Negatives the current grammar already parses cannot be blamed on a merge.
  std::vector<Sample> fresh;
  if (negatives)
    for (const auto& s : *negatives)
      if (!parser.accepts(s)) fresh.push_back(s);

  std::mt19937_64 rng(seed);
  for (const auto& clique : cliques.cliques) {
    if (clique.size() < 2) continue;
    ++report.cliques_examined;
    auto candidates = witness_candidates(graph, clique, rng, options.witness_samples);
    if (std::all_of(candidates.begin(), candidates.end(), covered)) continue;

    std::optional<std::uint32_t> target;
    for (auto i : clique)
      if (auto nt = bubble_nonterminal(trees, graph.bubbles[i])) target = target ? std::min(*target, *nt) : *nt;
    const std::uint32_t nt = target ? *target : next_nonterminal(trees);
    std::vector<SynTree> merged = trees;
    merge_bubbles(merged, graph, clique, nt);
    if (!fresh.empty()) {
      EarleyParser next(raw_grammar(merged, names));
      auto bad = std::find_if(fresh.begin(), fresh.end(), [&](const Sample& s) { return next.accepts(s); });
      if (bad != fresh.end()) {
        ++report.inconsistent;
        continue;
      }
    }
    trees = std::move(merged);
    report.nonterminal = nt;
    report.clique = clique;
    report.outcome = MergeOutcome::Merged;
    return report;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Inference loops

namespace {

struct MergeLoopStats {
  std::size_t merges = 0;
  std::size_t cliques_examined = 0;
  bool complete = true;
};

MergeLoopStats merge_loop(std::vector<SynTree>& trees, const DistributionalMatrix& matrix, std::size_t terminals,
                          std::uint64_t seed, const SynInferOptions& options) {
  MergeLoopStats stats;
  std::vector<Sample> negatives;
  if (options.merge.consistent) negatives = matrix_negatives(matrix);
  for (;;) {
    if (stats.merges >= options.max_merges_per_round) {
      stats.complete = false;
      break;
    }
    auto graph = build_swap_graph(matrix, trees, options.merge.bubbles);
    auto report = select_and_merge(graph, trees, terminals, seed + stats.merges, options.merge, &negatives);
    stats.cliques_examined += report.cliques_examined;
    if (!report.enumeration_complete) stats.complete = false;
    if (report.outcome == MergeOutcome::Done) break;
    ++stats.merges;
    if (options.on_merge) options.on_merge(MergeEvent{trees, matrix, report});
  }
  return stats;
}

}  // namespace

SynInferResult generalize(const std::vector<Sample>& samples, Oracle& oracle, const Renderer& render,
                          const std::vector<std::string>& terminal_names, std::uint64_t seed,
                          const SynInferOptions& options) {
  SynInferResult res;
  res.samples = samples;
  res.trees = flat_trees(samples);
  if (options.on_round) options.on_round(res.samples);
  auto matrix = build_matrix(samples, oracle, render);
  res.matrix_rows = matrix.row_count();
  res.matrix_cols = matrix.col_count();
  auto stats = merge_loop(res.trees, matrix, terminal_names.size(), seed, options);
  res.merges = stats.merges;
  res.cliques_examined = stats.cliques_examined;
  res.complete = stats.complete;
  res.grammar = to_grammar(res.trees, terminal_names);
  if (!res.grammar.rules.empty()) {
    EarleyParser parser(res.grammar);
    for (const auto& s : samples) res.training_parsed += parser.accepts(s);
  }
  return res;
}

SynInferResult infer_grammar(const std::vector<std::string>& examples, const Lexicon& lexicon, Oracle& oracle,
                             std::uint64_t seed, const SynInferOptions& options) {
  SynInferResult res;
  const Renderer render = Renderer::canonical(lexicon);
  std::vector<std::string> names;
  for (const auto& c : lexicon.classes) names.push_back(c.name);

  std::vector<Sample> inputs;
  for (const auto& x : examples) {
    auto tok = lexicon.tokenize(x);
    if (!tok.ok()) {
      res.complete = false;
      continue;
    }
    Sample s;
    for (const auto& t : tok.tokens) s.push_back(t.cls);
    inputs.push_back(std::move(s));
  }

  EarleyParser parser(raw_grammar(res.trees, names));
  DistributionalMatrix matrix;
  std::set<Sample> known;
  std::uint64_t round = 0;
  auto absorb = [&]() {
    if (options.on_round) options.on_round(res.samples);
    matrix = build_matrix_from(res.samples, oracle, render, &matrix);
    auto stats = merge_loop(res.trees, matrix, names.size(), seed + 1000003 * ++round, options);
    res.merges += stats.merges;
    res.cliques_examined += stats.cliques_examined;
    if (!stats.complete) res.complete = false;
    parser = EarleyParser(raw_grammar(res.trees, names));
  };
  for (const auto& x : inputs) {
    while (!parser.accepts(x)) {
      if (res.samples.size() >= options.max_samples) {
        res.complete = false;
        break;
      }
      Predicate generalizing = [&](const Sample& s) { return !parser.accepts(s) && oracle.query(render(s)); };
      auto found = search_min(x, generalizing, options.forest_budget);
      if (found.path.empty() || known.count(found.sample)) {
        res.complete = false;
        break;
      }
      if (found.status == SearchStatus::BudgetExhausted) res.complete = false;
      known.insert(found.sample);
      res.samples.push_back(found.sample);
      res.trees.push_back(flat_tree(found.sample));
      absorb();
    }
  }
  res.matrix_rows = matrix.row_count();
  res.matrix_cols = matrix.col_count();
  for (const auto& x : inputs) res.training_parsed += parser.accepts(x);
  if (res.training_parsed < examples.size()) res.complete = false;
  res.grammar = to_grammar(res.trees, names);
  return res;
}

}  // namespace bbgi
