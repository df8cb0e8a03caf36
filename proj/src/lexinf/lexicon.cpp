#include "bbgi/lexinf/lexicon.hpp"

namespace bbgi {

bool is_alnum_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}

TokenizeResult Lexicon::tokenize(std::string_view input) const {
  TokenizeResult out;
  std::size_t pos = 0;
  while (pos < input.size()) {
    if (insensitive.test(static_cast<unsigned char>(input[pos]))) {
      ++pos;
      continue;
    }
    long best = 0;
    std::uint32_t best_class = 0;
    for (std::uint32_t c = 0; c < classes.size(); ++c) {
      long len = classes[c].dfa.longest_match(input, pos);
      if (len > best) {
        best = len;
        best_class = c;
      }
    }
    if (best <= 0) {
      out.error_offset = pos;
      return out;
    }
    out.tokens.push_back({best_class, std::string(input.substr(pos, static_cast<std::size_t>(best))), pos});
    pos += static_cast<std::size_t>(best);
  }
  return out;
}

char Lexicon::separator() const {
  if (insensitive.test(' ')) return ' ';
  for (unsigned b = 1; b < 256; ++b)
    if (insensitive.test(b)) return static_cast<char>(b);
  return 0;
}

std::vector<std::string> Lexicon::canonical_lexemes() const {
  std::vector<std::string> out;
  out.reserve(classes.size());
  for (const auto& c : classes) out.push_back(c.dfa.shortest_accepted());
  return out;
}

std::optional<std::uint32_t> Lexicon::find(std::string_view name) const {
  for (std::uint32_t i = 0; i < classes.size(); ++i)
    if (classes[i].name == name) return i;
  return std::nullopt;
}

std::string join_lexemes(const std::vector<std::string>& lexemes, char separator) {
  std::string out;
  for (const auto& lx : lexemes) {
    if (separator != 0 && !out.empty() && !lx.empty() &&
        is_alnum_byte(static_cast<unsigned char>(out.back())) &&
        is_alnum_byte(static_cast<unsigned char>(lx.front())))
      out.push_back(separator);
    out += lx;
  }
  return out;
}

std::string render_classes(const std::vector<std::uint32_t>& classes,
                           const std::vector<std::string>& lexeme_of, char separator) {
  std::vector<std::string> parts;
  parts.reserve(classes.size());
  for (auto c : classes) parts.push_back(lexeme_of[c]);
  return join_lexemes(parts, separator);
}

}  // namespace bbgi
