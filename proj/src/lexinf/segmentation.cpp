#include "bbgi/lexinf/segmentation.hpp"

#include "bbgi/lexinf/lexicon.hpp"

namespace bbgi {

namespace {

char separator_of(const ByteSet& insensitive) {
  Lexicon lx;
  lx.insensitive = insensitive;
  return lx.separator();
}

struct Piece {
  std::size_t begin, end;
};

std::vector<Piece> pieces(std::string_view s, const ByteSet& insensitive) {
  std::vector<Piece> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (insensitive.test(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (is_alnum_byte(c))
      while (j < s.size() && is_alnum_byte(static_cast<unsigned char>(s[j])) &&
             !insensitive.test(static_cast<unsigned char>(s[j])))
        ++j;
    out.push_back({i, j});
    i = j;
  }
  return out;
}

}  // namespace

ByteKind byte_kind(unsigned char c) {
  if (c >= '0' && c <= '9') return ByteKind::Digit;
  if (is_alnum_byte(c)) return ByteKind::Letterlike;
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return ByteKind::Whitespace;
  return ByteKind::Punctuation;
}

std::vector<std::string> segment(std::string_view example, const SegmentationRules& rules) {
  std::vector<std::string> out;
  for (const auto& p : pieces(example, rules.insensitive)) out.emplace_back(example.substr(p.begin, p.end - p.begin));
  return out;
}

ByteSet discover_insensitive(const std::vector<std::string>& corpus, Oracle& oracle) {
  ByteSet out;
  for (unsigned char b : std::string(" \t\n\r")) {
    std::vector<std::string> probes;
    for (const auto& x : corpus) {
      auto pos = x.find(static_cast<char>(b));
      if (pos == std::string::npos) continue;
      std::string y = x;
      y.insert(pos, 1, static_cast<char>(b));
      probes.push_back(std::move(y));
    }
    if (probes.empty()) continue;
    bool all = true;
    for (bool v : oracle.batch_query(probes)) all = all && v;
    if (all) out.set(b);
  }
  return out;
}

std::string render_segments(const std::vector<std::string>& segments, const ByteSet& insensitive) {
  return join_lexemes(segments, separator_of(insensitive));
}

std::vector<std::string> refine_boundaries(std::string_view example, const SegmentationRules& rules,
                                           Oracle& oracle) {
  const auto ps = pieces(example, rules.insensitive);
  std::vector<std::string> out;
  if (ps.empty()) return out;
  const char sep = separator_of(rules.insensitive);

  // Boundaries between touching pieces are candidates; separated ones are confirmed.
  std::vector<std::size_t> candidates;
  std::vector<std::string> probes;
  for (std::size_t k = 0; k + 1 < ps.size(); ++k) {
    if (ps[k].end != ps[k + 1].begin || sep == 0) continue;
    std::string y(example);
    y.insert(ps[k].end, 1, sep);
    candidates.push_back(k);
    probes.push_back(std::move(y));
  }
  const auto verdicts = oracle.batch_query(probes);
  std::vector<bool> merge_next(ps.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i) merge_next[candidates[i]] = !verdicts[i];

  std::size_t begin = ps[0].begin;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    if (k + 1 < ps.size() && merge_next[k]) continue;
    out.emplace_back(example.substr(begin, ps[k].end - begin));
    if (k + 1 < ps.size()) begin = ps[k + 1].begin;
  }
  return out;
}

}  // namespace bbgi
