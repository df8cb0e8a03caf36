#include "bbgi/forest/forest.hpp"

namespace bbgi {

namespace {

Sample without(const Sample& s, std::size_t i, std::size_t j) {
  Sample out(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(i));
  out.insert(out.end(), s.begin() + static_cast<std::ptrdiff_t>(j), s.end());
  return out;
}

// s[0,i) + s[k,l) + s[j,n)
Sample replaced(const Sample& s, std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
  Sample out(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(i));
  out.insert(out.end(), s.begin() + static_cast<std::ptrdiff_t>(k), s.begin() + static_cast<std::ptrdiff_t>(l));
  out.insert(out.end(), s.begin() + static_cast<std::ptrdiff_t>(j), s.end());
  return out;
}

}  // namespace

ChildCursor::ChildCursor(const Sample& sample, std::size_t depth) : s_(sample), depth_(depth) {}

bool ChildCursor::refill() {
  const std::size_t n = s_.size();
  batch_.clear();
  pos_ = 0;
  while (batch_.empty()) {
    if (stage_ == -1 || removed_ == 0) {
      // Advance to the next strategy.
      ++stage_;
      emitted_.clear();
      if (stage_ > 2) return false;
      start_ = 0;
      if (stage_ == 0) {
        const std::size_t h = n / 2;
        removed_ = depth_ % 2 == 0 ? h : n - h;
      } else if (stage_ == 1) {
        removed_ = n;
      } else {
        removed_ = n == 0 ? 0 : n - 1;
      }
      continue;
    }
    if (stage_ == 0) {
      const std::size_t h = n / 2;
      const std::size_t lo = depth_ % 2 == 0 ? 0 : h;
      const std::size_t hi = depth_ % 2 == 0 ? h : n;
      for (std::size_t i = lo; i + removed_ <= hi; ++i) batch_.push_back(without(s_, i, i + removed_));
      --removed_;
    } else if (stage_ == 1) {
      for (std::size_t i = 0; i + removed_ <= n; ++i) batch_.push_back(without(s_, i, i + removed_));
      --removed_;
    } else {
      // Replacement removing `removed_` units, starting at `start_`.
      const std::size_t i = start_;
      for (std::size_t r = 1; i + removed_ + r <= n; ++r) {
        const std::size_t j = i + removed_ + r;
        for (std::size_t k = i; k <= i + removed_; ++k) batch_.push_back(replaced(s_, i, j, k, k + r));
      }
      if (++start_ + removed_ + 1 > n) {
        start_ = 0;
        --removed_;
      }
    }
    std::erase_if(batch_, [&](const Sample& c) { return !emitted_.insert(c).second; });
  }
  return true;
}

std::optional<Child> ChildCursor::next() {
  if (pos_ >= batch_.size() && !refill()) return std::nullopt;
  return Child{std::move(batch_[pos_++]), static_cast<Strategy>(stage_)};
}

std::vector<Child> expand_children(const Sample& sample, std::size_t depth) {
  std::vector<Child> out;
  ChildCursor cursor(sample, depth);
  while (auto c = cursor.next()) out.push_back(std::move(*c));
  return out;
}

namespace {

SearchResult descend(const Sample& root, const Predicate& predicate, std::size_t budget,
                     std::map<Sample, bool>& cache) {
  SearchResult res;
  auto evaluate = [&](const Sample& s) -> std::optional<bool> {
    if (auto it = cache.find(s); it != cache.end()) return it->second;
    if (res.evaluations >= budget) return std::nullopt;
    ++res.evaluations;
    bool v = predicate(s);
    cache.emplace(s, v);
    return v;
  };

  auto ok = evaluate(root);
  if (!ok) {
    res.status = SearchStatus::BudgetExhausted;
    return res;
  }
  if (!*ok) return res;

  Sample current = root;
  res.path.push_back(current);
  for (std::size_t depth = 0;; ++depth) {
    ChildCursor cursor(current, depth);
    bool moved = false;
    while (auto child = cursor.next()) {
      auto v = evaluate(child->sample);
      if (!v) {
        res.status = SearchStatus::BudgetExhausted;
        res.sample = current;
        return res;
      }
      if (*v) {
        current = std::move(child->sample);
        res.path.push_back(current);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  res.status = SearchStatus::Found;
  res.sample = std::move(current);
  return res;
}

}  // namespace

Forest::Forest(std::vector<Sample> roots, std::size_t budget) : roots_(std::move(roots)), budget_(budget) {}

SearchResult Forest::search_min(std::size_t index, const Predicate& predicate) {
  return descend(roots_.at(index), predicate, budget_, cache_);
}

SearchResult search_min(const Sample& root, const Predicate& predicate, std::size_t budget) {
  std::map<Sample, bool> cache;
  return descend(root, predicate, budget, cache);
}

}  // namespace bbgi
