#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bbgi/automata/lstar.hpp"
#include "bbgi/forest/forest.hpp"
#include "bbgi/lexinf/lexicon.hpp"
#include "bbgi/lexinf/segmentation.hpp"
#include "bbgi/oracle/oracle.hpp"

namespace bbgi {

using Segments = std::vector<std::string>;

/// Every token context of a sample: position i gives (sample[0,i), sample[i+1,n)).
std::vector<LexContext> contexts_of(const Segments& sample);

/// Token classifier. Internal nodes hold a context; values accepted in it go
/// right, rejected ones left. Leaves are token classes.
class DecisionTree {
 public:
  struct Node {
    std::vector<std::string> values;
    std::optional<LexContext> context;
    int left = -1;
    int right = -1;

    bool leaf() const { return !context.has_value(); }
  };

  DecisionTree();

  /// Adds `value` at the root and re-runs the update over the whole tree.
  void classify(const std::string& value, const std::vector<LexContext>& contexts, Oracle& oracle,
                char separator);
  /// Re-routes every value from the root, splitting leaves that disagree on
  /// some context.
  void update(const std::vector<LexContext>& contexts, Oracle& oracle, char separator);

  bool contains(const std::string& value) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  /// Nonempty leaves ordered by their earliest inserted value.
  std::vector<std::vector<std::string>> classes() const;
  /// Contexts on the path from the root to the leaf holding `value`, with the
  /// branch taken at each.
  std::vector<std::pair<LexContext, bool>> path_of(const std::string& value) const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::string> order_;

  void update_node(int node, const std::vector<LexContext>& contexts, Oracle& oracle, char separator);
};

struct LexInferOptions {
  std::size_t max_validation_rounds = 20;
  std::size_t substitutions_per_token = 3;
  std::size_t forest_budget = Forest::kDefaultBudget;
  LearnOptions lstar;
};

struct LexCounterexample {
  Segments sample;
  std::size_t position = 0;
  std::string substitute;
};

struct LexInferResult {
  Lexicon lexicon;
  DecisionTree tree;
  /// Short samples whose contexts drive classification.
  std::vector<Segments> short_samples;
  std::vector<LexCounterexample> counterexamples;
  std::size_t validation_rounds = 0;
  /// False when a round or learning cap stopped refinement early.
  bool complete = true;
};

/// Learns one DFA per class with G over `contexts`; classes keep tree order.
Lexicon build_lexicon(const DecisionTree& tree, const std::vector<LexContext>& contexts, const ByteSet& insensitive,
                      Oracle& oracle, std::uint64_t seed, const LearnOptions& options, bool* all_final = nullptr);

/// Substitutes class members into the training examples; the first rejection
/// is minimized with the decomposition forest.
std::optional<LexCounterexample> validate_lexicon(const Lexicon& lexicon, const DecisionTree& tree,
                                                  const std::vector<std::string>& examples, Oracle& oracle,
                                                  std::uint64_t seed, const LexInferOptions& options = {});

/// Full lexical pipeline. Throws EmptyCorpus on an empty corpus.
LexInferResult infer_lexicon(const std::vector<std::string>& examples, Oracle& oracle, std::uint64_t seed,
                             const LexInferOptions& options = {});

}  // namespace bbgi
