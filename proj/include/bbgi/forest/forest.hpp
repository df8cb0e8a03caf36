#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace bbgi {

using Sample = std::vector<std::uint32_t>;

enum class Strategy { BinaryDeletion, MaxDeletion, Replacement };

struct Child {
  Sample sample;
  Strategy strategy;
};

/// Children of `sample` at recursion depth `depth`, in search order:
///   1. deletions inside one half (first half at even depth, second at odd),
///   2. deletions anywhere,
///   3. replacement of a subsequence by one of its own proper subsequences.
/// Within a strategy: more units removed first, then leftmost start.
/// Duplicates within a strategy are dropped.
std::vector<Child> expand_children(const Sample& sample, std::size_t depth);

/// Lazy version of expand_children.
class ChildCursor {
 public:
  ChildCursor(const Sample& sample, std::size_t depth);
  std::optional<Child> next();

 private:
  Sample s_;
  std::size_t depth_;
  int stage_ = -1;
  // Units removed by the current batch, and the start position (replacement only).
  std::size_t removed_ = 0, start_ = 0;
  std::vector<Sample> batch_;
  std::size_t pos_ = 0;
  std::set<Sample> emitted_;

  bool refill();
};

using Predicate = std::function<bool(const Sample&)>;

enum class SearchStatus { Found, NotFound, BudgetExhausted };

struct SearchResult {
  SearchStatus status = SearchStatus::NotFound;
  Sample sample;
  /// Samples along the descent, root first; all satisfy the predicate.
  std::vector<Sample> path;
  std::size_t evaluations = 0;
};

/// One decomposition tree per training example, expanded on demand.
class Forest {
 public:
  static constexpr std::size_t kDefaultBudget = 10000;

  explicit Forest(std::vector<Sample> roots, std::size_t budget = kDefaultBudget);

  const std::vector<Sample>& roots() const { return roots_; }
  std::size_t budget() const { return budget_; }
  void set_budget(std::size_t budget) { budget_ = budget; }

  /// Greedy depth-first descent from root `index`: the first satisfying child
  /// is entered, until no child satisfies. The budget bounds predicate
  /// evaluations on uncached samples.
  SearchResult search_min(std::size_t index, const Predicate& predicate);

  /// Verdicts are cached by sample; clear when the predicate changes meaning.
  void clear_cache() { cache_.clear(); }
  std::size_t cache_size() const { return cache_.size(); }

 private:
  std::vector<Sample> roots_;
  std::size_t budget_;
  std::map<Sample, bool> cache_;
};

/// Search from an arbitrary sample with a private cache.
SearchResult search_min(const Sample& root, const Predicate& predicate,
                        std::size_t budget = Forest::kDefaultBudget);

}  // namespace bbgi
