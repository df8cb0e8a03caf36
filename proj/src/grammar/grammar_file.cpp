#include "bbgi/grammar/grammar_file.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bbgi/errors.hpp"

namespace bbgi {

namespace {

bool needs_escape(unsigned char c) {
  return c < 0x20 || c > 0x7E || c == '\\' || c == '"' || c == '[' || c == ']' || c == '-';
}

void put_byte(std::string& out, unsigned char c) {
  static const char* hex = "0123456789abcdef";
  if (needs_escape(c)) {
    out += "\\x";
    out.push_back(hex[c >> 4]);
    out.push_back(hex[c & 15]);
  } else {
    out.push_back(static_cast<char>(c));
  }
}

std::string ranges_of(const ByteSet& set) {
  std::string out;
  for (unsigned b = 0; b < 256;) {
    if (!set.test(b)) {
      ++b;
      continue;
    }
    unsigned e = b;
    while (e + 1 < 256 && set.test(e + 1)) ++e;
    put_byte(out, static_cast<unsigned char>(b));
    if (e > b) {
      out.push_back('-');
      put_byte(out, static_cast<unsigned char>(e));
    }
    b = e + 1;
  }
  return out;
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (unsigned char c : s)
    if (!(std::isalnum(c) || c == '_')) return false;
  return true;
}

class LineCursor {
 public:
  LineCursor(std::string_view line, std::size_t number) : line_(line), number_(number) {}

  [[noreturn]] void fail(const std::string& what) const { throw MalformedInput(what, number_, pos_); }

  void skip_spaces() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_spaces();
    return pos_ >= line_.size();
  }
  char peek() {
    skip_spaces();
    return pos_ < line_.size() ? line_[pos_] : '\0';
  }

  std::string word() {
    skip_spaces();
    std::size_t b = pos_;
    while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') ++pos_;
    if (b == pos_) fail("expected a word");
    return std::string(line_.substr(b, pos_ - b));
  }

  void expect(std::string_view w) {
    std::size_t at = (skip_spaces(), pos_);
    if (word() != w) {
      pos_ = at;
      fail("expected '" + std::string(w) + "'");
    }
  }

  std::size_t number() {
    skip_spaces();
    std::size_t b = pos_;
    std::size_t v = 0;
    while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(line_[pos_] - '0');
      ++pos_;
    }
    if (b == pos_) fail("expected a number");
    return v;
  }

  unsigned char byte() {
    if (pos_ >= line_.size()) fail("unexpected end of line");
    char c = line_[pos_];
    if (c == '\\') {
      if (pos_ + 4 > line_.size()) fail("truncated escape");
      if (line_[pos_ + 1] != 'x') fail("bad escape");
      auto hexval = [this](char h) -> int {
        if (h >= '0' && h <= '9') return h - '0';
        if (h >= 'a' && h <= 'f') return h - 'a' + 10;
        if (h >= 'A' && h <= 'F') return h - 'A' + 10;
        fail("bad hex digit");
      };
      int v = hexval(line_[pos_ + 2]) * 16 + hexval(line_[pos_ + 3]);
      pos_ += 4;
      return static_cast<unsigned char>(v);
    }
    if (needs_escape(static_cast<unsigned char>(c))) fail("byte must be escaped");
    ++pos_;
    return static_cast<unsigned char>(c);
  }

  std::string quoted() {
    skip_spaces();
    if (pos_ >= line_.size() || line_[pos_] != '"') fail("expected '\"'");
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= line_.size()) fail("unterminated string");
      if (line_[pos_] == '"') {
        ++pos_;
        return out;
      }
      out.push_back(static_cast<char>(byte()));
    }
  }

  ByteSet bracket() {
    skip_spaces();
    if (pos_ >= line_.size() || line_[pos_] != '[') fail("expected '['");
    ++pos_;
    ByteSet out;
    while (true) {
      if (pos_ >= line_.size()) fail("unterminated range");
      if (line_[pos_] == ']') {
        ++pos_;
        return out;
      }
      unsigned char lo = byte();
      unsigned char hi = lo;
      if (pos_ < line_.size() && line_[pos_] == '-') {
        ++pos_;
        hi = byte();
      }
      if (hi < lo) fail("descending range");
      for (unsigned b = lo; b <= hi; ++b) out.set(b);
    }
  }

 private:
  std::string_view line_;
  std::size_t number_;
  std::size_t pos_ = 0;
};

class LineReader {
 public:
  explicit LineReader(std::string_view text) {
    std::size_t b = 0;
    while (b <= text.size()) {
      std::size_t e = text.find('\n', b);
      if (e == std::string_view::npos) e = text.size();
      std::string_view line = text.substr(b, e - b);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines_.push_back(line);
      b = e + 1;
    }
  }

  // Next non-blank line.
  LineCursor next() {
    while (index_ < lines_.size()) {
      std::string_view line = lines_[index_++];
      if (line.find_first_not_of(" \t") != std::string_view::npos) return LineCursor(line, index_);
    }
    throw MalformedInput("unexpected end of input", index_, 0);
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t index_ = 0;
};

}  // namespace

std::string escape_bytes(std::string_view bytes) {
  std::string out;
  for (unsigned char c : bytes) put_byte(out, c);
  return out;
}

std::string serialize(const Grammar& g, const Lexicon& lexicon) {
  const bool with_dfa = !lexicon.classes.empty();
  if (with_dfa) {
    if (lexicon.classes.size() != g.terminals.size())
      throw std::invalid_argument("lexicon and grammar disagree on token classes");
    for (std::size_t i = 0; i < g.terminals.size(); ++i)
      if (lexicon.classes[i].name != g.terminals[i])
        throw std::invalid_argument("lexicon and grammar disagree on token names");
  }
  std::ostringstream os;
  os << "bbgi-grammar 1\n";
  os << "tokens " << g.terminals.size() << (with_dfa ? " dfa" : " names") << "\n";
  std::string insensitive;
  for (unsigned b = 0; b < 256; ++b)
    if (lexicon.insensitive.test(b)) insensitive.push_back(static_cast<char>(b));
  os << "insensitive \"" << escape_bytes(insensitive) << "\"\n";
  for (std::size_t i = 0; i < g.terminals.size(); ++i) {
    os << "token \"" << escape_bytes(g.terminals[i]) << "\"\n";
    if (!with_dfa) continue;
    const TokenDfa& d = lexicon.classes[i].dfa;
    os << "  charset [" << ranges_of(d.charset()) << "]\n";
    os << "  states " << d.state_count() << "\n";
    os << "  accept";
    for (std::size_t q = 0; q < d.state_count(); ++q)
      if (d.is_accepting(static_cast<int>(q))) os << ' ' << q;
    os << "\n";
    for (std::size_t q = 0; q < d.state_count(); ++q) {
      std::map<int, ByteSet> by_target;
      for (unsigned b = 0; b < 256; ++b) {
        int t = d.next(static_cast<int>(q), static_cast<unsigned char>(b));
        if (t != TokenDfa::kDead) by_target[t].set(b);
      }
      // One edge per maximal byte run, ordered by starting byte.
      std::map<unsigned, std::pair<unsigned, int>> runs;
      for (const auto& [t, set] : by_target)
        for (unsigned b = 0; b < 256;) {
          if (!set.test(b)) {
            ++b;
            continue;
          }
          unsigned e = b;
          while (e + 1 < 256 && set.test(e + 1)) ++e;
          runs[b] = {e, t};
          b = e + 1;
        }
      for (const auto& [lo, rest] : runs) {
        std::string range;
        put_byte(range, static_cast<unsigned char>(lo));
        if (rest.first > lo) {
          range.push_back('-');
          put_byte(range, static_cast<unsigned char>(rest.first));
        }
        os << "  edge " << q << " [" << range << "] " << rest.second << "\n";
      }
    }
    os << "  end\n";
  }
  os << "nonterminals " << g.nonterminals.size();
  for (const auto& n : g.nonterminals) {
    if (!is_identifier(n)) throw std::invalid_argument("nonterminal name is not an identifier: " + n);
    os << ' ' << n;
  }
  os << "\n";
  os << "rules " << g.rules.size() << "\n";
  for (const auto& r : g.rules) {
    os << g.nonterminals[r.lhs] << " ->";
    for (const auto& s : r.rhs) {
      if (s.terminal)
        os << " \"" << escape_bytes(g.terminals[s.id]) << "\"";
      else
        os << ' ' << g.nonterminals[s.id];
    }
    os << "\n";
  }
  os << "start " << g.nonterminals[g.start] << "\n";
  return os.str();
}

std::pair<Grammar, Lexicon> deserialize(std::string_view text) {
  LineReader reader(text);
  Grammar g;
  Lexicon lex;

  {
    auto c = reader.next();
    c.expect("bbgi-grammar");
    if (c.number() != 1) c.fail("unsupported version");
  }
  std::size_t token_count = 0;
  bool with_dfa = false;
  {
    auto c = reader.next();
    c.expect("tokens");
    token_count = c.number();
    std::string mode = c.word();
    if (mode == "dfa")
      with_dfa = true;
    else if (mode != "names")
      c.fail("expected 'dfa' or 'names'");
  }
  {
    auto c = reader.next();
    c.expect("insensitive");
    for (unsigned char b : c.quoted()) lex.insensitive.set(b);
  }
  std::map<std::string, std::uint32_t> terminal_ids;
  for (std::size_t i = 0; i < token_count; ++i) {
    auto c = reader.next();
    c.expect("token");
    std::string name = c.quoted();
    if (!terminal_ids.emplace(name, static_cast<std::uint32_t>(i)).second) c.fail("duplicate token name");
    g.terminals.push_back(name);
    if (!with_dfa) continue;
    TokenDfa d;
    ByteSet charset;
    {
      auto cc = reader.next();
      cc.expect("charset");
      charset = cc.bracket();
    }
    std::size_t states = 0;
    {
      auto cc = reader.next();
      cc.expect("states");
      states = cc.number();
      if (states == 0) cc.fail("a token needs at least one state");
      for (std::size_t q = 1; q < states; ++q) d.add_state(false);
    }
    {
      auto cc = reader.next();
      cc.expect("accept");
      while (!cc.at_end()) {
        std::size_t q = cc.number();
        if (q >= states) cc.fail("state out of range");
        d.set_accepting(static_cast<int>(q), true);
      }
    }
    while (true) {
      auto cc = reader.next();
      std::string w = cc.word();
      if (w == "end") break;
      if (w != "edge") cc.fail("expected 'edge' or 'end'");
      std::size_t from = cc.number();
      ByteSet bytes = cc.bracket();
      std::size_t to = cc.number();
      if (from >= states || to >= states) cc.fail("state out of range");
      d.set_range(static_cast<int>(from), bytes, static_cast<int>(to));
    }
    d.set_charset(charset);
    lex.classes.push_back({name, std::move(d)});
  }
  std::map<std::string, std::uint32_t> nonterminal_ids;
  {
    auto c = reader.next();
    c.expect("nonterminals");
    std::size_t n = c.number();
    for (std::size_t i = 0; i < n; ++i) {
      std::string name = c.word();
      if (!is_identifier(name)) c.fail("bad nonterminal name");
      if (!nonterminal_ids.emplace(name, static_cast<std::uint32_t>(i)).second)
        c.fail("duplicate nonterminal name");
      g.nonterminals.push_back(name);
    }
    if (!c.at_end()) c.fail("trailing input");
  }
  {
    auto c = reader.next();
    c.expect("rules");
    std::size_t n = c.number();
    for (std::size_t i = 0; i < n; ++i) {
      auto rc = reader.next();
      std::string lhs = rc.word();
      auto it = nonterminal_ids.find(lhs);
      if (it == nonterminal_ids.end()) rc.fail("unknown nonterminal " + lhs);
      rc.expect("->");
      Rule r{it->second, {}};
      while (!rc.at_end()) {
        if (rc.peek() == '"') {
          std::string name = rc.quoted();
          auto t = terminal_ids.find(name);
          if (t == terminal_ids.end()) rc.fail("unknown token " + name);
          r.rhs.push_back(Symbol::t(t->second));
        } else {
          std::string name = rc.word();
          auto t = nonterminal_ids.find(name);
          if (t == nonterminal_ids.end()) rc.fail("unknown nonterminal " + name);
          r.rhs.push_back(Symbol::nt(t->second));
        }
      }
      g.rules.push_back(std::move(r));
    }
  }
  {
    auto c = reader.next();
    c.expect("start");
    std::string name = c.word();
    auto it = nonterminal_ids.find(name);
    if (it == nonterminal_ids.end()) c.fail("unknown start symbol");
    g.start = it->second;
  }
  return {std::move(g), std::move(lex)};
}

std::string ebnf(const Grammar& g, const Lexicon& lexicon) {
  std::ostringstream os;
  for (std::uint32_t n = 0; n < g.nonterminals.size(); ++n) {
    bool first = true;
    for (const auto& r : g.rules) {
      if (r.lhs != n) continue;
      os << (first ? g.nonterminals[n] + (n == g.start ? " (start)" : "") + "\n  ::= " : "\n   |  ");
      first = false;
      if (r.rhs.empty()) os << "(* empty *)";
      for (std::size_t i = 0; i < r.rhs.size(); ++i) {
        if (i) os << ' ';
        if (r.rhs[i].terminal)
          os << '"' << escape_bytes(g.terminals[r.rhs[i].id]) << '"';
        else
          os << g.nonterminals[r.rhs[i].id];
      }
    }
    if (!first) os << "\n  ;\n";
  }
  if (!lexicon.classes.empty()) {
    os << "\n(* tokens: name, canonical lexeme *)\n";
    for (const auto& c : lexicon.classes)
      os << '"' << escape_bytes(c.name) << "\" e.g. \"" << escape_bytes(c.dfa.shortest_accepted())
         << "\"\n";
  }
  return os.str();
}

}  // namespace bbgi
