#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bbgi/forest/forest.hpp"
#include "bbgi/grammar/grammar.hpp"
#include "bbgi/lexinf/lexicon.hpp"
#include "bbgi/oracle/oracle.hpp"

namespace bbgi {

/// Token-class sequence context p □ q.
struct SynContext {
  Sample prefix;
  Sample suffix;

  auto operator<=>(const SynContext&) const = default;
};

Sample fill(const SynContext& context, const Sample& sub);

/// Renders class sequences with one lexeme per class.
struct Renderer {
  std::vector<std::string> lexeme_of;
  char separator = ' ';

  static Renderer canonical(const Lexicon& lexicon);
  std::string operator()(const Sample& classes) const;
};

/// M[i, j] = oracle(rows[i] ⊙ cols[j]).
class DistributionalMatrix {
 public:
  DistributionalMatrix() = default;
  DistributionalMatrix(std::vector<Sample> rows, std::vector<SynContext> cols);

  std::size_t row_count() const { return rows_.size(); }
  std::size_t col_count() const { return cols_.size(); }
  const std::vector<Sample>& rows() const { return rows_; }
  const std::vector<SynContext>& cols() const { return cols_; }

  std::optional<std::size_t> row(const Sample& sub) const;
  std::optional<std::size_t> col(const SynContext& con) const;
  bool at(std::size_t r, std::size_t c) const { return (bits_[r][c >> 6] >> (c & 63)) & 1u; }
  void set(std::size_t r, std::size_t c, bool v);
  /// Missing substrings or contexts read as 0.
  bool lookup(const Sample& sub, const SynContext& con) const;
  /// Whether every column in `cols` is set in row `r`.
  bool covers(std::size_t r, const std::vector<std::uint64_t>& cols) const;
  std::vector<std::uint64_t> column_mask(const std::vector<std::size_t>& cols) const;

 private:
  std::vector<Sample> rows_;
  std::vector<SynContext> cols_;
  std::map<Sample, std::size_t> row_index_;
  std::map<SynContext, std::size_t> col_index_;
  std::vector<std::vector<std::uint64_t>> bits_;
};

/// Rows: every nonempty substring of every example. Columns: every context
/// left by deleting one nonempty fragment. All cells are queried.
DistributionalMatrix build_matrix(const std::vector<Sample>& examples, Oracle& oracle, const Renderer& render);

struct SynNode {
  bool terminal = false;
  std::uint32_t id = 0;
  std::vector<SynNode> children;
  /// Token span of the node within its sample.
  std::size_t begin = 0, end = 0;
};

/// Root symbol of every tree.
inline constexpr std::uint32_t kStartSymbol = 0;

struct SynTree {
  Sample sample;
  SynNode root;
};

SynTree flat_tree(const Sample& sample);
std::vector<SynTree> flat_trees(const std::vector<Sample>& samples);
/// Recomputes token spans.
void annotate(SynTree& tree);

/// Contiguous run [begin, end) of the children of the node at `path`.
struct BubbleRef {
  std::size_t tree = 0;
  std::vector<std::size_t> path;
  std::size_t begin = 0, end = 0;

  auto operator<=>(const BubbleRef&) const = default;
};

struct BubbleProfile {
  std::set<Sample> sub;
  std::set<SynContext> con;
};

struct BubbleOptions {
  /// Parents with more children only get spans up to `max_span`.
  std::size_t full_span_children = 64;
  std::size_t max_span = 8;
  /// Spans inside a nonterminal take every context of that nonterminal.
  bool parent_contexts = false;
};

const SynNode& node_at(const std::vector<SynTree>& trees, std::size_t tree, const std::vector<std::size_t>& path);

/// The nonterminal of a one-child bubble over a nonterminal node.
std::optional<std::uint32_t> bubble_nonterminal(const std::vector<SynTree>& trees, const BubbleRef& b);

std::vector<BubbleRef> enumerate_bubbles(const std::vector<SynTree>& trees, const BubbleOptions& options = {});

/// Sub: the union of yields over all nodes of a nonterminal bubble, else the
/// span's own yield. Con: the span's context in its sample, or, below a
/// nonterminal parent, the span's position composed with every context of that
/// parent.
BubbleProfile bubble_profile(const std::vector<SynTree>& trees, const BubbleRef& bubble,
                             const BubbleOptions& options = {});

/// Yields and contexts of every node of each nonterminal (root included).
std::map<std::uint32_t, BubbleProfile> nonterminal_profiles(const std::vector<SynTree>& trees);

class SwapGraph {
 public:
  std::vector<BubbleRef> bubbles;
  std::vector<BubbleProfile> profiles;
  /// Bubbles with identical profiles share a group.
  std::vector<std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  /// Group adjacency; a group is adjacent to itself iff its own profile is swap-correct.
  std::vector<std::vector<bool>> group_edge;

  bool edge(std::size_t u, std::size_t v) const;
  std::size_t edge_count() const;
};

/// Edge(u, v) iff every Sub(u)∪Sub(v) string is accepted in every
/// Con(u)∪Con(v) context according to the matrix. No oracle calls.
SwapGraph build_swap_graph(const DistributionalMatrix& matrix, const std::vector<SynTree>& trees,
                           const BubbleOptions& options = {});

struct CliqueEnumeration {
  /// Maximal cliques as sorted bubble indices, largest first, then lexicographic.
  std::vector<std::vector<std::size_t>> cliques;
  bool complete = true;
};

/// Bron–Kerbosch with pivoting over the graph; a greedy pass covers the
/// remainder when `budget` expansions run out.
CliqueEnumeration maximal_cliques(const SwapGraph& graph, std::size_t budget = 200000);

/// One rule per distinct (symbol, children) signature, in first-appearance order.
Grammar to_grammar(const std::vector<SynTree>& trees, const std::vector<std::string>& terminal_names);

struct MergeOptions {
  std::size_t witness_samples = 256;
  std::size_t clique_budget = 200000;
  /// Skip merges whose grammar parses a string the matrix records as rejected.
  bool consistent = true;
  BubbleOptions bubbles;
};

enum class MergeOutcome { Merged, Done };

struct MergeReport {
  MergeOutcome outcome = MergeOutcome::Done;
  std::vector<std::size_t> clique;
  std::uint32_t nonterminal = 0;
  std::size_t cliques_examined = 0;
  /// Generalizing cliques skipped for parsing a rejected matrix string.
  std::size_t inconsistent = 0;
  bool enumeration_complete = true;
};

/// Distinct strings of the zero cells, shortest first.
std::vector<Sample> matrix_negatives(const DistributionalMatrix& matrix);

/// Picks the first clique that yields a string the current tree grammar does
/// not parse and merges its bubbles into one nonterminal. With `negatives`,
/// a merge whose grammar parses any of them is skipped.
MergeReport select_and_merge(const SwapGraph& graph, std::vector<SynTree>& trees, std::size_t terminal_count,
                             std::uint64_t seed, const MergeOptions& options = {},
                             const std::vector<Sample>* negatives = nullptr);

/// Merges `clique` (bubble indices into graph.bubbles) into `target`.
void merge_bubbles(std::vector<SynTree>& trees, const SwapGraph& graph, const std::vector<std::size_t>& clique,
                   std::uint32_t target);

std::uint32_t next_nonterminal(const std::vector<SynTree>& trees);

struct MergeEvent {
  const std::vector<SynTree>& trees;
  const DistributionalMatrix& matrix;
  const MergeReport& report;
};

struct SynInferOptions {
  MergeOptions merge;
  std::size_t forest_budget = Forest::kDefaultBudget;
  std::size_t max_merges_per_round = 100000;
  std::size_t max_samples = 100000;
  std::function<void(const MergeEvent&)> on_merge;
  /// Called before each matrix build with the accumulated samples.
  std::function<void(const std::vector<Sample>&)> on_round;
};

struct SynInferResult {
  Grammar grammar;
  std::vector<SynTree> trees;
  std::vector<Sample> samples;
  std::size_t merges = 0;
  std::size_t cliques_examined = 0;
  std::size_t matrix_rows = 0, matrix_cols = 0;
  std::size_t training_parsed = 0;
  bool complete = true;
};

/// Generalizes flat trees of `samples` with repeated clique merging.
SynInferResult generalize(const std::vector<Sample>& samples, Oracle& oracle, const Renderer& render,
                          const std::vector<std::string>& terminal_names, std::uint64_t seed,
                          const SynInferOptions& options = {});

/// Outer loop: short samples not yet parsed are pulled from each training
/// example's decomposition tree until every example parses.
SynInferResult infer_grammar(const std::vector<std::string>& examples, const Lexicon& lexicon, Oracle& oracle,
                             std::uint64_t seed, const SynInferOptions& options = {});

}  // namespace bbgi
