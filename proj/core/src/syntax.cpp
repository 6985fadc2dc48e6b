#include "vulnforge/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "vulnforge/error.hpp"
#include "vulnforge/ingest.hpp"

namespace vulnforge {

namespace {

enum class Tok { Ident, Punct, Literal };

struct Token {
  Tok kind;
  std::string text;
  int line;
};

[[noreturn]] void parse_failure(const std::string& path, int line, const std::string& what) {
  throw Error(ErrorKind::ParseFailure, path + ":" + std::to_string(line) + ": " + what);
}

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

// ---------------------------------------------------------------------------
// C, C++ and Java

class CFamilyLexer {
 public:
  CFamilyLexer(std::string_view src, Language lang, const std::string& path)
      : src_(src), lang_(lang), path_(path) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
        line_start_ = true;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        ++pos_;
        continue;
      }
      if (c == '#' && line_start_ && lang_ != Language::Java) {
        directive();
        continue;
      }
      line_start_ = false;
      if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        block_comment();
        continue;
      }
      if (c == '"') {
        string_literal();
        continue;
      }
      if (c == '\'') {
        char_literal();
        continue;
      }
      if (ident_start(static_cast<unsigned char>(c))) {
        const std::size_t begin = pos_;
        while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tokens_.push_back({Tok::Ident, std::string(src_.substr(begin, pos_ - begin)), line_});
        ident_end_ = pos_;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        const std::size_t begin = pos_;
        while (pos_ < src_.size() && (ident_char(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                                      src_[pos_] == '\''))
          ++pos_;
        tokens_.push_back({Tok::Literal, std::string(src_.substr(begin, pos_ - begin)), line_});
        continue;
      }
      if ((c == ':' && peek(1) == ':') || (c == '-' && peek(1) == '>')) {
        tokens_.push_back({Tok::Punct, std::string(src_.substr(pos_, 2)), line_});
        pos_ += 2;
        continue;
      }
      tokens_.push_back({Tok::Punct, std::string(1, c), line_});
      ++pos_;
    }
    return std::move(tokens_);
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void block_comment() {
    const int start_line = line_;
    pos_ += 2;
    while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) {
      if (src_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ + 1 >= src_.size()) parse_failure(path_, start_line, "unterminated block comment");
    pos_ += 2;
  }

  // Reads one physical directive line (with continuations) and returns its
  // keyword. Comments inside the directive are honoured.
  std::string read_directive() {
    ++pos_;  // '#'
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    const std::size_t begin = pos_;
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    std::string keyword(src_.substr(begin, pos_ - begin));
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && peek(1) == '\n') {
        pos_ += 2;
        ++line_;
        continue;
      }
      if (src_[pos_] == '\\' && peek(1) == '\r' && peek(2) == '\n') {
        pos_ += 3;
        ++line_;
        continue;
      }
      if (src_[pos_] == '/' && peek(1) == '*') {
        block_comment();
        continue;
      }
      if (src_[pos_] == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        break;
      }
      ++pos_;
    }
    return keyword;
  }

  // Only the first branch of a conditional is lexed, so both halves of
  // "#ifdef A / void f() { / #else / void f(int) { / #endif" cannot
  // unbalance the braces.
  void directive() {
    const std::string keyword = read_directive();
    if (keyword != "else" && keyword != "elif" && keyword != "elifdef" && keyword != "elifndef") return;
    int depth = 1;
    while (pos_ < src_.size() && depth > 0) {
      if (src_[pos_] == '\n') {
        ++line_;
        ++pos_;
        continue;
      }
      // Skip leading whitespace, then check for a directive.
      std::size_t p = pos_;
      while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t')) ++p;
      if (p < src_.size() && src_[p] == '#') {
        pos_ = p;
        const std::string kw = read_directive();
        if (kw == "if" || kw == "ifdef" || kw == "ifndef") ++depth;
        if (kw == "endif") --depth;
        continue;
      }
      while (pos_ < src_.size() && src_[pos_] != '\n') {
        if (src_[pos_] == '/' && peek(1) == '*') {
          block_comment();
          continue;
        }
        ++pos_;
      }
    }
  }

  bool raw_string_prefix() const {
    if (lang_ == Language::Java || tokens_.empty() || ident_end_ != pos_) return false;
    const auto& t = tokens_.back().text;
    return t == "R" || t == "u8R" || t == "uR" || t == "UR" || t == "LR";
  }

  void string_literal() {
    const int start_line = line_;
    if (raw_string_prefix()) {
      tokens_.pop_back();
      const std::size_t open = src_.find('(', pos_ + 1);
      if (open == std::string_view::npos) parse_failure(path_, start_line, "malformed raw string");
      const std::string terminator = ")" + std::string(src_.substr(pos_ + 1, open - pos_ - 1)) + "\"";
      const std::size_t close = src_.find(terminator, open + 1);
      if (close == std::string_view::npos) parse_failure(path_, start_line, "unterminated raw string");
      for (std::size_t k = pos_; k < close; ++k)
        if (src_[k] == '\n') ++line_;
      pos_ = close + terminator.size();
      tokens_.push_back({Tok::Literal, "\"\"", start_line});
      return;
    }
    if (lang_ == Language::Java && peek(1) == '"' && peek(2) == '"') {
      const std::size_t close = src_.find("\"\"\"", pos_ + 3);
      if (close == std::string_view::npos) parse_failure(path_, start_line, "unterminated text block");
      for (std::size_t k = pos_; k < close; ++k)
        if (src_[k] == '\n') ++line_;
      pos_ = close + 3;
      tokens_.push_back({Tok::Literal, "\"\"", start_line});
      return;
    }
    ++pos_;
    while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
        if (src_[pos_ + 1] == '\n') ++line_;
        pos_ += 2;
        continue;
      }
      ++pos_;
    }
    if (pos_ < src_.size() && src_[pos_] == '"') ++pos_;
    tokens_.push_back({Tok::Literal, "\"\"", start_line});
  }

  void char_literal() {
    ++pos_;
    while (pos_ < src_.size() && src_[pos_] != '\'' && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] != '\n') {
        pos_ += 2;
        continue;
      }
      ++pos_;
    }
    if (pos_ < src_.size() && src_[pos_] == '\'') ++pos_;
    tokens_.push_back({Tok::Literal, "''", line_});
  }

  std::string_view src_;
  Language lang_;
  const std::string& path_;
  std::size_t pos_ = 0;
  std::size_t ident_end_ = std::string_view::npos;
  int line_ = 1;
  bool line_start_ = true;
  std::vector<Token> tokens_;
};

const std::unordered_set<std::string>& c_reserved() {
  static const std::unordered_set<std::string> words{
      "if",       "while",      "for",        "switch",   "return",         "sizeof",    "alignof",
      "_Alignof", "typeof",     "__typeof__", "__typeof", "decltype",       "catch",     "case",
      "do",       "else",       "defined",    "static_assert", "_Static_assert", "throw", "noexcept",
      "new",      "delete",     "using",      "typedef",  "__attribute__",  "__attribute", "__declspec",
      "alignas",  "_Alignas",   "asm",        "__asm__",  "__asm",          "goto",      "operator",
      "template", "typename",   "co_await",   "co_return", "co_yield",      "synchronized", "super",
      "this",     "instanceof", "assert_not_used"};
  return words;
}

bool attribute_word(const std::string& w) {
  return w == "__attribute__" || w == "__attribute" || w == "__declspec" || w == "alignas" || w == "_Alignas";
}

bool macro_like(const std::string& w) {
  if (w.size() > 2 && w[0] == '_' && w[1] == '_') return true;
  bool has_alpha = false;
  for (unsigned char c : w) {
    if (std::islower(c)) return false;
    if (std::isalpha(c)) has_alpha = true;
  }
  return has_alpha;
}

class CFamilyParser {
 public:
  CFamilyParser(std::vector<Token> tokens, Language lang, const std::string& path)
      : toks_(std::move(tokens)), lang_(lang), path_(path) {}

  std::vector<FunctionInfo> run() {
    enum class Kind { Container, Function, Block };
    struct Scope {
      Kind kind;
      int fn = -1;
    };
    std::vector<Scope> stack{{Kind::Container, -1}};
    std::vector<std::size_t> stmt;

    for (std::size_t i = 0; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      Scope& top = stack.back();
      if (top.kind == Kind::Container) {
        if (is(t, ";")) {
          stmt.clear();
          continue;
        }
        if (is(t, ":") && !stmt.empty() && access_specifier(toks_[stmt.back()].text)) {
          stmt.clear();
          continue;
        }
        if (is(t, "{")) {
          if (lang_ != Language::Java && initializer_brace(stmt)) {
            const std::size_t close = matching(i, "{", "}");
            for (std::size_t k = i; k <= close; ++k) stmt.push_back(k);
            i = close;
            continue;
          }
          const Decl decl = classify(stmt);
          if (decl.kind == DeclKind::Function) {
            FunctionInfo fn;
            fn.name = decl.name;
            fn.span = {decl.start_line, t.line};
            fns_.push_back(std::move(fn));
            if (lang_ != Language::Java) init_list_calls(stmt, fns_.back());
            stack.push_back({Kind::Function, static_cast<int>(fns_.size() - 1)});
          } else if (decl.kind == DeclKind::Container) {
            stack.push_back({Kind::Container, -1});
          } else {
            stack.push_back({Kind::Block, -1});
          }
          stmt.clear();
          continue;
        }
        if (is(t, "}")) {
          if (stack.size() == 1) parse_failure(path_, t.line, "unbalanced '}'");
          stack.pop_back();
          stmt.clear();
          continue;
        }
        stmt.push_back(i);
        continue;
      }

      if (is(t, "{")) {
        stack.push_back({Kind::Block, top.fn});
        continue;
      }
      if (is(t, "}")) {
        if (top.kind == Kind::Function) fns_[top.fn].span.end = t.line;
        stack.pop_back();
        continue;
      }
      if (top.fn >= 0 && is_call(i)) fns_[top.fn].calls.push_back({t.text, t.line});
    }
    if (stack.size() != 1) parse_failure(path_, toks_.empty() ? 1 : toks_.back().line, "unbalanced '{'");
    return std::move(fns_);
  }

 private:
  enum class DeclKind { Function, Container, Block };
  struct Decl {
    DeclKind kind = DeclKind::Block;
    std::string name;
    int start_line = 1;
  };

  static bool is(const Token& t, const char* text) { return t.kind == Tok::Punct && t.text == text; }
  bool is_word(std::size_t i, const char* text) const {
    return i < toks_.size() && toks_[i].kind == Tok::Ident && toks_[i].text == text;
  }

  static bool access_specifier(const std::string& w) {
    return w == "public" || w == "private" || w == "protected" || w == "signals" || w == "slots";
  }

  std::size_t matching(std::size_t open, const char* o, const char* c) const {
    int depth = 0;
    for (std::size_t k = open; k < toks_.size(); ++k) {
      if (is(toks_[k], o)) ++depth;
      if (is(toks_[k], c) && --depth == 0) return k;
    }
    parse_failure(path_, toks_[open].line, std::string("unbalanced '") + o + "'");
  }

  // Index within stmt of the ')' matching stmt[p] == '(' or npos.
  static std::size_t match_in(const std::vector<const Token*>& s, std::size_t p) {
    int depth = 0;
    for (std::size_t k = p; k < s.size(); ++k) {
      if (is(*s[k], "(")) ++depth;
      if (is(*s[k], ")") && --depth == 0) return k;
    }
    return std::string::npos;
  }

  bool is_call(std::size_t i) const {
    const Token& t = toks_[i];
    if (t.kind != Tok::Ident || i + 1 >= toks_.size() || !is(toks_[i + 1], "(")) return false;
    if (c_reserved().count(t.text)) return false;
    if (i > 0 && is(toks_[i - 1], "@")) return false;
    return true;
  }

  // Calls made while evaluating a member-init list. The initialised members
  // and bases themselves are not recorded.
  void init_list_calls(const std::vector<std::size_t>& stmt, FunctionInfo& fn) const {
    std::size_t k = 0;
    for (int depth = 0; k + 1 < stmt.size(); ++k) {
      const Token& cur = toks_[stmt[k]];
      if (is(cur, "(")) ++depth;
      if (is(cur, ")") && --depth == 0 && is(toks_[stmt[k + 1]], ":")) break;
    }
    int depth = 0;
    for (k += 2; k < stmt.size(); ++k) {
      const Token& cur = toks_[stmt[k]];
      if (is(cur, "(") || is(cur, "{")) ++depth;
      if (is(cur, ")") || is(cur, "}")) --depth;
      if (depth > 0 && is_call(stmt[k])) fn.calls.push_back({cur.text, cur.line});
    }
  }

  // `{` opening a brace-initialiser inside a constructor's member-init list.
  bool initializer_brace(const std::vector<std::size_t>& stmt) const {
    if (stmt.empty()) return false;
    const Token& last = toks_[stmt.back()];
    if (last.kind != Tok::Ident && !is(last, ">")) return false;
    int depth = 0;
    for (std::size_t k = 0; k + 1 < stmt.size(); ++k) {
      const Token& cur = toks_[stmt[k]];
      if (is(cur, "(")) ++depth;
      if (is(cur, ")") && --depth == 0 && is(toks_[stmt[k + 1]], ":")) return true;
    }
    return false;
  }

  bool tail_ok(const std::vector<const Token*>& s, std::size_t k) const {
    static const std::unordered_set<std::string> qualifiers{
        "const", "volatile", "override", "final", "noexcept", "mutable", "throw", "try", "constexpr",
        "__attribute__", "__attribute", "__declspec", "restrict", "__restrict", "__restrict__"};
    while (k < s.size()) {
      const Token& t = *s[k];
      if (is(t, "->") || (lang_ != Language::Java && is(t, ":"))) return true;
      if (lang_ == Language::Java && t.kind == Tok::Ident && t.text == "throws") return true;
      if (is(t, "&") || (is(t, "&") && k + 1 < s.size() && is(*s[k + 1], "&"))) {
        ++k;
        continue;
      }
      if (is(t, "[") && k + 1 < s.size() && is(*s[k + 1], "[")) {
        while (k < s.size() && !(is(*s[k], "]") && k + 1 < s.size() && is(*s[k + 1], "]"))) ++k;
        k += 2;
        continue;
      }
      if (t.kind == Tok::Ident && (qualifiers.count(t.text) || macro_like(t.text))) {
        ++k;
        if (k < s.size() && is(*s[k], "(")) {
          const std::size_t close = match_in(s, k);
          if (close == std::string::npos) return false;
          k = close + 1;
        }
        continue;
      }
      return false;
    }
    return true;
  }

  bool attribute_group(const std::vector<const Token*>& s, std::size_t open) const {
    if (open == 0) return false;
    const Token& before = *s[open - 1];
    if (before.kind != Tok::Ident) return false;
    if (attribute_word(before.text)) return true;
    return lang_ == Language::Java && open >= 2 && is(*s[open - 2], "@");
  }

  Decl classify(const std::vector<std::size_t>& idx) const {
    std::vector<const Token*> s;
    s.reserve(idx.size());
    for (auto k : idx) s.push_back(&toks_[k]);
    Decl decl;
    if (s.empty()) return decl;

    auto has_word = [&](const char* w) {
      for (std::size_t k = 0; k < s.size(); ++k)
        if (s[k]->kind == Tok::Ident && s[k]->text == w && !(k > 0 && is(*s[k - 1], "."))) return true;
      return false;
    };

    if (lang_ == Language::Java &&
        (has_word("class") || has_word("interface") || has_word("enum") || has_word("record"))) {
      decl.kind = DeclKind::Container;
      return decl;
    }

    // Template header range, whose '=' defaults do not count as assignments.
    std::size_t template_end = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k]->kind == Tok::Ident && s[k]->text == "template" && k + 1 < s.size() && is(*s[k + 1], "<")) {
        int depth = 0;
        for (std::size_t m = k + 1; m < s.size(); ++m) {
          if (is(*s[m], "<")) ++depth;
          if (is(*s[m], ">") && --depth == 0) {
            template_end = m;
            break;
          }
        }
      }
    }

    int depth = 0;
    std::size_t last_group_close = std::string::npos;
    for (std::size_t p = 0; p < s.size(); ++p) {
      const Token& t = *s[p];
      if (is(t, "(")) {
        if (depth == 0) {
          std::string name;
          std::size_t name_pos = std::string::npos;
          if (p > 0 && s[p - 1]->kind == Tok::Ident && !c_reserved().count(s[p - 1]->text) &&
              !(p > 1 && is(*s[p - 2], "@"))) {
            name = s[p - 1]->text;
            name_pos = p - 1;
            if (name_pos > 0 && is(*s[name_pos - 1], "~")) name = "~" + name;
          } else {
            // operator overloads: "operator" <symbol tokens> "("
            for (std::size_t k = p; k-- > 0;) {
              if (s[k]->kind == Tok::Ident && s[k]->text == "operator") {
                name = "operator";
                for (std::size_t m = k + 1; m < p; ++m) name += s[m]->text;
                name_pos = k;
                break;
              }
              if (s[k]->kind == Tok::Ident || is(*s[k], ")") || is(*s[k], ";")) break;
            }
            if (name == "operator" && p + 1 < s.size() && is(*s[p + 1], ")") && p + 2 < s.size() &&
                is(*s[p + 2], "(")) {
              name = "operator()";
              p += 2;
            }
          }
          const std::size_t close = match_in(s, p);
          if (!name.empty() && close != std::string::npos && tail_ok(s, close + 1)) {
            bool assigned = false;
            int d = 0;
            for (std::size_t k = template_end; k < name_pos; ++k) {
              if (is(*s[k], "(")) ++d;
              if (is(*s[k], ")")) --d;
              if (d == 0 && is(*s[k], "=")) assigned = true;
            }
            if (assigned) return decl;
            decl.kind = DeclKind::Function;
            decl.name = name;
            std::size_t start = 0;
            if (last_group_close != std::string::npos) start = last_group_close + 1;
            decl.start_line = s[std::min(start, name_pos)]->line;
            return decl;
          }
          if (close != std::string::npos && !attribute_group(s, p)) last_group_close = close;
          if (close != std::string::npos && attribute_group(s, p)) {
            p = close;
            continue;
          }
        }
        ++depth;
        continue;
      }
      if (is(t, ")")) --depth;
    }

    if (lang_ == Language::Java) return decl;
    if (has_word("namespace")) {
      decl.kind = DeclKind::Container;
      return decl;
    }
    if (s.front()->kind == Tok::Ident && s.front()->text == "extern" && s.size() <= 2) {
      decl.kind = DeclKind::Container;
      return decl;
    }
    if (has_word("enum")) return decl;
    if (has_word("class") || has_word("struct") || has_word("union")) {
      int d = 0;
      for (std::size_t k = template_end; k < s.size(); ++k) {
        if (is(*s[k], "(")) ++d;
        if (is(*s[k], ")")) --d;
        if (d == 0 && is(*s[k], "=")) return decl;
      }
      decl.kind = DeclKind::Container;
    }
    return decl;
  }

  std::vector<Token> toks_;
  Language lang_;
  const std::string& path_;
  std::vector<FunctionInfo> fns_;
};

// ---------------------------------------------------------------------------
// Python

struct LogicalLine {
  int first = 1;
  int last = 1;
  int indent = 0;
  std::vector<Token> tokens;
};

std::vector<LogicalLine> python_lines(std::string_view src, const std::string& path) {
  std::vector<LogicalLine> lines;
  LogicalLine cur;
  bool have = false;
  int depth = 0;
  int line = 1;
  std::size_t pos = 0;
  bool at_line_start = true;
  bool continuation = false;

  auto finish = [&] {
    if (have && !cur.tokens.empty()) lines.push_back(std::move(cur));
    cur = LogicalLine{};
    have = false;
  };

  while (pos < src.size()) {
    if (at_line_start && depth == 0 && !continuation) {
      int indent = 0;
      while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\f')) {
        indent = src[pos] == '\t' ? (indent / 8 + 1) * 8 : indent + 1;
        ++pos;
      }
      at_line_start = false;
      if (pos < src.size() && src[pos] != '\n' && src[pos] != '#' && src[pos] != '\r') {
        cur.indent = indent;
        cur.first = line;
        have = true;
      }
      continue;
    }
    at_line_start = false;
    const char c = src[pos];
    if (c == '\n') {
      ++line;
      ++pos;
      at_line_start = true;
      if (depth == 0 && !continuation) finish();
      continuation = false;
      continue;
    }
    if (c == '\\' && pos + 1 < src.size() && (src[pos + 1] == '\n' || src[pos + 1] == '\r')) {
      continuation = true;
      ++pos;
      if (src[pos] == '\r') ++pos;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
      ++pos;
      continue;
    }
    if (c == '#') {
      while (pos < src.size() && src[pos] != '\n') ++pos;
      continue;
    }
    if (!have) {
      // Continuation of an empty line; treat it as a fresh logical line.
      cur.first = line;
      have = true;
    }
    cur.last = line;
    if (c == '"' || c == '\'') {
      const int start_line = line;
      const bool triple = pos + 2 < src.size() && src[pos + 1] == c && src[pos + 2] == c;
      if (triple) {
        const std::string delim(3, c);
        std::size_t k = pos + 3;
        while (k < src.size() && src.compare(k, 3, delim) != 0) {
          if (src[k] == '\\') ++k;
          if (k < src.size() && src[k] == '\n') ++line;
          ++k;
        }
        if (k >= src.size()) parse_failure(path, start_line, "unterminated triple-quoted string");
        pos = k + 3;
      } else {
        ++pos;
        while (pos < src.size() && src[pos] != c && src[pos] != '\n') {
          if (src[pos] == '\\' && pos + 1 < src.size()) {
            if (src[pos + 1] == '\n') ++line;
            ++pos;
          }
          ++pos;
        }
        if (pos < src.size() && src[pos] == c) ++pos;
      }
      cur.tokens.push_back({Tok::Literal, "\"\"", start_line});
      cur.last = line;
      continue;
    }
    if (ident_start(static_cast<unsigned char>(c))) {
      const std::size_t begin = pos;
      while (pos < src.size() && ident_char(static_cast<unsigned char>(src[pos]))) ++pos;
      std::string word(src.substr(begin, pos - begin));
      // String prefixes (r"", b'', f"""...""") fold into the literal.
      if (pos < src.size() && (src[pos] == '"' || src[pos] == '\'') && word.size() <= 2 &&
          std::all_of(word.begin(), word.end(), [](char ch) {
            return std::string_view("rRbBuUfF").find(ch) != std::string_view::npos;
          }))
        continue;
      cur.tokens.push_back({Tok::Ident, std::move(word), line});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t begin = pos;
      while (pos < src.size() && (ident_char(static_cast<unsigned char>(src[pos])) || src[pos] == '.')) ++pos;
      cur.tokens.push_back({Tok::Literal, std::string(src.substr(begin, pos - begin)), line});
      continue;
    }
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') {
      if (depth == 0) parse_failure(path, line, std::string("unbalanced '") + c + "'");
      --depth;
    }
    cur.tokens.push_back({Tok::Punct, std::string(1, c), line});
    ++pos;
  }
  if (depth != 0) parse_failure(path, line, "unclosed bracket at end of file");
  finish();
  return lines;
}

const std::unordered_set<std::string>& python_keywords() {
  static const std::unordered_set<std::string> words{
      "def",    "class", "if",     "elif",     "else",  "while", "for",   "return", "and",
      "or",     "not",   "in",     "is",       "assert", "del",  "with",  "yield",  "await",
      "except", "raise", "import", "from",     "lambda", "global", "nonlocal", "try", "finally",
      "pass",   "break", "continue", "async",  "None",  "True",  "False"};
  return words;
}

std::vector<FunctionInfo> parse_python(std::string_view src, const std::string& path) {
  const auto lines = python_lines(src, path);
  std::vector<FunctionInfo> fns;
  struct Frame {
    int indent;
    int fn;
  };
  std::vector<Frame> stack;  // open def blocks only
  int decorator_line = 0;

  auto add_calls = [&](int fn, const LogicalLine& l) {
    const auto& t = l.tokens;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
      if (t[k].kind != Tok::Ident || t[k + 1].kind != Tok::Punct || t[k + 1].text != "(") continue;
      if (python_keywords().count(t[k].text)) continue;
      if (k > 0 && t[k - 1].kind == Tok::Ident && (t[k - 1].text == "def" || t[k - 1].text == "class")) continue;
      fns[fn].calls.push_back({t[k].text, t[k].line});
    }
  };

  for (const auto& l : lines) {
    while (!stack.empty() && l.indent <= stack.back().indent) stack.pop_back();
    const int enclosing = stack.empty() ? -1 : stack.back().fn;
    const auto& t = l.tokens;
    const bool is_decorator = t.front().kind == Tok::Punct && t.front().text == "@";
    std::size_t def_at = std::string::npos;
    if (t.front().kind == Tok::Ident && t.front().text == "def") def_at = 0;
    if (t.size() > 1 && t[0].text == "async" && t[1].text == "def") def_at = 1;

    if (enclosing >= 0) {
      fns[enclosing].span.end = std::max(fns[enclosing].span.end, l.last);
      add_calls(enclosing, l);
      if (def_at != std::string::npos) stack.push_back({l.indent, enclosing});
      continue;
    }
    if (is_decorator) {
      if (decorator_line == 0) decorator_line = l.first;
      continue;
    }
    if (def_at != std::string::npos && def_at + 1 < t.size() && t[def_at + 1].kind == Tok::Ident) {
      FunctionInfo fn;
      fn.name = t[def_at + 1].text;
      fn.span = {decorator_line ? decorator_line : l.first, l.last};
      fns.push_back(std::move(fn));
      const int idx = static_cast<int>(fns.size() - 1);
      stack.push_back({l.indent, idx});
      // Decorator lines belong to the function span.
      if (decorator_line) {
        for (const auto& prev : lines) {
          if (prev.first >= decorator_line && prev.first < l.first) add_calls(idx, prev);
        }
      }
      add_calls(idx, l);
    }
    decorator_line = 0;
  }
  return fns;
}

}  // namespace

FileIndex parse_source(std::string path, std::string_view content, Language language) {
  FileIndex file;
  file.language = language;
  switch (language) {
    case Language::C:
    case Language::Cpp:
    case Language::Java: {
      auto tokens = CFamilyLexer(content, language, path).run();
      file.functions = CFamilyParser(std::move(tokens), language, path).run();
      break;
    }
    case Language::Python:
      file.functions = parse_python(content, path);
      break;
    case Language::Other:
      break;
  }
  file.path = std::move(path);
  return file;
}

FunctionRef make_ref(const FileIndex& file, const FunctionInfo& fn) { return {file.path, fn.name, fn.span}; }

void SyntaxIndex::remove(const std::string& path) {
  const auto it = files_.find(path);
  if (it == files_.end()) return;
  auto drop = [&](std::map<std::string, std::vector<FunctionRef>>& m) {
    for (auto& [name, refs] : m)
      refs.erase(std::remove_if(refs.begin(), refs.end(), [&](const FunctionRef& r) { return r.file == path; }),
                 refs.end());
  };
  drop(by_name_);
  drop(callers_);
  function_count_ -= it->second.functions.size();
  files_.erase(it);
  contents_.erase(path);
}

void SyntaxIndex::add(FileIndex file, std::string content) {
  remove(file.path);
  const std::string path = file.path;
  for (const auto& fn : file.functions) {
    const FunctionRef ref = make_ref(file, fn);
    auto& named = by_name_[fn.name];
    named.insert(std::upper_bound(named.begin(), named.end(), ref), ref);
    std::set<std::string> seen;
    for (const auto& call : fn.calls) {
      if (!seen.insert(call.name).second) continue;
      auto& callers = callers_[call.name];
      callers.insert(std::upper_bound(callers.begin(), callers.end(), ref), ref);
    }
  }
  function_count_ += file.functions.size();
  contents_[path] = std::move(content);
  files_.emplace(path, std::move(file));
}

void SyntaxIndex::add_failure(ParseReport report) { errors_.push_back(std::move(report)); }

const FileIndex* SyntaxIndex::file(const std::string& path) const {
  const auto it = files_.find(path);
  return it == files_.end() ? nullptr : &it->second;
}

const std::vector<FunctionRef>& SyntaxIndex::functions_named(const std::string& name) const {
  static const std::vector<FunctionRef> empty;
  const auto it = by_name_.find(name);
  return it == by_name_.end() ? empty : it->second;
}

const std::vector<FunctionRef>& SyntaxIndex::callers_of(const std::string& name) const {
  static const std::vector<FunctionRef> empty;
  const auto it = callers_.find(name);
  return it == callers_.end() ? empty : it->second;
}

const FunctionInfo* SyntaxIndex::lookup(const FunctionRef& ref) const {
  const FileIndex* f = file(ref.file);
  if (!f) return nullptr;
  for (const auto& fn : f->functions)
    if (fn.name == ref.name && fn.span == ref.span) return &fn;
  return nullptr;
}

std::string slice_lines(std::string_view content, LineSpan span) {
  std::size_t pos = 0;
  int line = 1;
  while (line < span.start && pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) return {};
    pos = nl + 1;
    ++line;
  }
  std::size_t end = pos;
  while (line <= span.end && end < content.size()) {
    const std::size_t nl = content.find('\n', end);
    end = nl == std::string_view::npos ? content.size() : nl + 1;
    ++line;
  }
  return std::string(content.substr(pos, end - pos));
}

std::string SyntaxIndex::function_text(const FunctionRef& ref) const {
  const auto it = contents_.find(ref.file);
  if (it == contents_.end()) return {};
  return slice_lines(it->second, ref.span);
}

SyntaxIndex build_syntax_index(const RepoSnapshot& snapshot, Language language) {
  SyntaxIndex index;
  for (const auto& [path, content] : snapshot) {
    const Language lang = detect_file_language(path);
    if (!is_supported(lang) || !same_family(lang, language)) continue;
    try {
      index.add(parse_source(path, content, lang), content);
    } catch (const Error& e) {
      index.add_failure({path, e.what()});
      FileIndex empty;
      empty.path = path;
      empty.language = lang;
      index.add(std::move(empty), content);
    }
  }
  return index;
}

}  // namespace vulnforge
