#include "rocq/vernac/lexer.hpp"

#include <algorithm>
#include <array>

#include "rocq/common/text.hpp"

namespace rocq::vernac {

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool starts_comment(std::string_view s, std::size_t i) {
  return i + 1 < s.size() && s[i] == '(' && s[i + 1] == '*';
}

// Index just past the closing quote; `""` inside a literal is an escaped quote.
std::size_t skip_string(std::string_view s, std::size_t i) {
  ++i;
  while (i < s.size()) {
    if (s[i] == '"') {
      if (i + 1 < s.size() && s[i + 1] == '"') {
        i += 2;
        continue;
      }
      return i + 1;
    }
    ++i;
  }
  return s.size();
}

// Index just past the matching `*)`; unterminated comments run to the end.
std::size_t skip_comment(std::string_view s, std::size_t i) {
  int depth = 0;
  while (i < s.size()) {
    if (starts_comment(s, i)) {
      ++depth;
      i += 2;
    } else if (s[i] == '*' && i + 1 < s.size() && s[i + 1] == ')') {
      i += 2;
      if (--depth == 0) return i;
    } else if (s[i] == '"') {
      i = skip_string(s, i);
    } else {
      ++i;
    }
  }
  return s.size();
}

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '\'' || c >= 0x80; }

bool is_single_symbol(char c) {
  return c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' || c == ',' ||
         c == ';';
}

bool is_symbol_char(char c) {
  static constexpr std::string_view kChars = "!#$%&*+-/:<=>?@\\^`|~.";
  return kChars.find(c) != std::string_view::npos;
}

// Multi-byte UTF-8 code points: Greek letters (U+0370..U+03FF) behave as
// identifier characters, every other non-ASCII code point is a symbol on its own.
std::size_t utf8_length(unsigned char lead) {
  if (lead >= 0xF0) return 4;
  if (lead >= 0xE0) return 3;
  if (lead >= 0xC0) return 2;
  return 1;
}

bool is_greek(std::string_view s, std::size_t i) {
  auto lead = static_cast<unsigned char>(s[i]);
  return lead == 0xCE || lead == 0xCF;
}

bool ident_char_at(std::string_view s, std::size_t i) {
  auto c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) return is_ident_char(c);
  return is_greek(s, i);
}

bool ident_start_at(std::string_view s, std::size_t i) {
  auto c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) return is_ident_start(c);
  return is_greek(s, i);
}

std::size_t scan_identifier(std::string_view s, std::size_t i) {
  while (true) {
    while (i < s.size() && ident_char_at(s, i)) {
      i += static_cast<unsigned char>(s[i]) < 0x80 ? 1 : utf8_length(static_cast<unsigned char>(s[i]));
    }
    // Qualified names continue across a dot directly followed by an identifier.
    if (i + 1 < s.size() && s[i] == '.' && ident_start_at(s, i + 1)) {
      ++i;
      continue;
    }
    return std::min(i, s.size());
  }
}

constexpr std::array<std::string_view, 8> kModifiers = {
    "Local", "Global", "Polymorphic", "Monomorphic", "Program",
    "Private", "Cumulative", "NonCumulative"};

bool is_modifier(std::string_view w) {
  return std::find(kModifiers.begin(), kModifiers.end(), w) != kModifiers.end();
}

struct KeywordKind {
  std::string_view keyword;
  DeclKind kind;
};

constexpr std::array<KeywordKind, 34> kKeywords = {{
    {"Theorem", DeclKind::Theorem},       {"Lemma", DeclKind::Theorem},
    {"Fact", DeclKind::Theorem},          {"Remark", DeclKind::Theorem},
    {"Corollary", DeclKind::Theorem},     {"Proposition", DeclKind::Theorem},
    {"Property", DeclKind::Theorem},      {"Example", DeclKind::Theorem},
    {"Definition", DeclKind::Definition}, {"Fixpoint", DeclKind::Definition},
    {"CoFixpoint", DeclKind::Definition}, {"Function", DeclKind::Definition},
    {"Let", DeclKind::Definition},        {"Instance", DeclKind::Definition},
    {"Inductive", DeclKind::Inductive},   {"CoInductive", DeclKind::Inductive},
    {"Variant", DeclKind::Inductive},     {"Record", DeclKind::Inductive},
    {"Structure", DeclKind::Inductive},   {"Class", DeclKind::Inductive},
    {"Axiom", DeclKind::Assumption},      {"Axioms", DeclKind::Assumption},
    {"Parameter", DeclKind::Assumption},  {"Parameters", DeclKind::Assumption},
    {"Conjecture", DeclKind::Assumption}, {"Hypothesis", DeclKind::Assumption},
    {"Hypotheses", DeclKind::Assumption}, {"Variable", DeclKind::Assumption},
    {"Variables", DeclKind::Assumption},  {"Notation", DeclKind::Notation},
    {"Infix", DeclKind::Notation},        {"Section", DeclKind::Section},
    {"End", DeclKind::End},               {"Ltac", DeclKind::Ltac},
}};

bool is_open(const Token& t) { return t.kind == TokenKind::Symbol && (t.text == "(" || t.text == "[" || t.text == "{"); }
bool is_close(const Token& t) { return t.kind == TokenKind::Symbol && (t.text == ")" || t.text == "]" || t.text == "}"); }
bool is_sym(const Token& t, std::string_view s) { return t.kind == TokenKind::Symbol && t.text == s; }
bool is_ident(const Token& t) { return t.kind == TokenKind::Identifier; }

bool has_top_level(const std::vector<Token>& toks, std::size_t from, std::string_view sym) {
  int depth = 0;
  for (std::size_t i = from; i < toks.size(); ++i) {
    if (is_open(toks[i])) ++depth;
    else if (is_close(toks[i])) --depth;
    else if (depth == 0 && is_sym(toks[i], sym)) return true;
  }
  return false;
}

// Names following top-level `with` in mutual blocks.
void add_mutual_names(const std::vector<Token>& toks, std::size_t from, std::vector<std::string>& names) {
  int depth = 0;
  for (std::size_t i = from; i + 1 < toks.size(); ++i) {
    if (is_open(toks[i])) ++depth;
    else if (is_close(toks[i])) --depth;
    else if (depth == 0 && is_ident(toks[i]) && toks[i].text == "with" && is_ident(toks[i + 1])) {
      // `match x with C => ...` also has a top-level `with`; a mutual
      // declaration reaches a typing colon before any `=>` or `|`.
      int inner = 0;
      for (std::size_t k = i + 2; k < toks.size(); ++k) {
        if (is_open(toks[k])) ++inner;
        else if (is_close(toks[k])) --inner;
        else if (inner == 0 && (is_sym(toks[k], "=>") || is_sym(toks[k], "|"))) break;
        else if (inner == 0 && toks[k].kind == TokenKind::Symbol && toks[k].text.starts_with(":")) {
          names.push_back(toks[i + 1].text);
          break;
        }
      }
    }
  }
}

void add_constructors(const std::vector<Token>& toks, std::size_t from, std::vector<std::string>& names) {
  int depth = 0;
  bool after_def = false;
  for (std::size_t i = from; i < toks.size(); ++i) {
    const auto& t = toks[i];
    if (depth == 0 && is_sym(t, ":=")) {
      after_def = true;
      if (i + 1 < toks.size() && is_ident(toks[i + 1])) names.push_back(toks[i + 1].text);
      continue;
    }
    if (depth == 0 && is_ident(t) && t.text == "with") after_def = false;
    if (after_def && depth == 1 && is_ident(t) && i > 0 &&
        (is_sym(toks[i - 1], "{") || is_sym(toks[i - 1], ";")) && i + 1 < toks.size() &&
        toks[i + 1].kind == TokenKind::Symbol && toks[i + 1].text.starts_with(":")) {
      names.push_back(t.text);  // record field
    }
    if (is_open(t)) ++depth;
    else if (is_close(t)) --depth;
    else if (after_def && depth == 0 && is_sym(t, "|") && i + 1 < toks.size() && is_ident(toks[i + 1])) {
      names.push_back(toks[i + 1].text);
    }
  }
}

void add_assumption_names(const std::vector<Token>& toks, std::size_t from, std::vector<std::string>& names) {
  std::size_t i = from;
  if (i < toks.size() && is_sym(toks[i], "(")) {
    int depth = 0;
    bool collecting = false;
    for (; i < toks.size(); ++i) {
      if (is_open(toks[i])) {
        ++depth;
        collecting = depth == 1;
        continue;
      }
      if (is_close(toks[i])) {
        --depth;
        continue;
      }
      if (collecting && toks[i].kind == TokenKind::Symbol && toks[i].text.starts_with(":")) collecting = false;
      if (collecting && is_ident(toks[i])) names.push_back(toks[i].text);
    }
    return;
  }
  for (; i < toks.size() && is_ident(toks[i]); ++i) names.push_back(toks[i].text);
}

}  // namespace

std::optional<std::size_t> unterminated_comment(std::string_view source) {
  std::size_t i = 0;
  while (i < source.size()) {
    if (starts_comment(source, i)) {
      const std::size_t start = i;
      int depth = 0;
      while (i < source.size()) {
        if (starts_comment(source, i)) {
          ++depth;
          i += 2;
        } else if (source[i] == '*' && i + 1 < source.size() && source[i + 1] == ')') {
          i += 2;
          if (--depth == 0) break;
        } else if (source[i] == '"') {
          i = skip_string(source, i);
        } else {
          ++i;
        }
      }
      if (depth > 0) return start;
    } else if (source[i] == '"') {
      i = skip_string(source, i);
    } else {
      ++i;
    }
  }
  return std::nullopt;
}

std::string blank_comments(std::string_view source) {
  std::string out(source);
  std::size_t i = 0;
  while (i < source.size()) {
    if (starts_comment(source, i)) {
      auto end = skip_comment(source, i);
      for (auto k = i; k < end; ++k) {
        if (out[k] != '\n') out[k] = ' ';
      }
      i = end;
    } else if (source[i] == '"') {
      i = skip_string(source, i);
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<Sentence> split_sentences(std::string_view src) {
  std::vector<Sentence> out;
  // line_of(offset) by counting incrementally as sentences advance.
  std::size_t line_cursor = 0;
  int line = 1;
  auto line_at = [&](std::size_t offset) {
    for (; line_cursor < offset; ++line_cursor) {
      if (src[line_cursor] == '\n') ++line;
    }
    return line;
  };
  auto emit = [&](std::size_t begin, std::size_t end, bool bullet, bool terminated) {
    Sentence s;
    s.begin = begin;
    s.end = end;
    s.line = line_at(begin);
    s.text = std::string(src.substr(begin, end - begin));
    std::string code = blank_comments(s.text);
    if (terminated && !bullet && !code.empty() && code.back() == '.') code.pop_back();
    s.code = std::string(text::trim(code));
    s.bullet = bullet;
    s.terminated = terminated;
    out.push_back(std::move(s));
  };

  std::size_t i = 0;
  const std::size_t n = src.size();
  while (true) {
    while (i < n) {
      if (is_blank(src[i])) ++i;
      else if (starts_comment(src, i)) i = skip_comment(src, i);
      else break;
    }
    if (i >= n) break;
    const std::size_t begin = i;
    const char c = src[i];
    if (c == '-' || c == '+' || c == '*') {
      std::size_t j = i;
      while (j < n && src[j] == c) ++j;
      emit(begin, j, true, true);
      i = j;
      continue;
    }
    if ((c == '{' && !(i + 1 < n && src[i + 1] == '|')) || c == '}') {
      emit(begin, i + 1, true, true);
      i = i + 1;
      continue;
    }
    std::size_t j = i;
    bool terminated = false;
    while (j < n) {
      if (starts_comment(src, j)) {
        j = skip_comment(src, j);
        continue;
      }
      if (src[j] == '"') {
        j = skip_string(src, j);
        continue;
      }
      if (src[j] == '.' && (j + 1 == n || is_blank(src[j + 1])) && !(j > begin && src[j - 1] == '.')) {
        ++j;
        terminated = true;
        break;
      }
      ++j;
    }
    emit(begin, j, false, terminated);
    i = j;
  }
  return out;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (is_blank(c) || c == '\v') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    TokenKind kind;
    if (c == '"') {
      i = skip_string(s, i);
      kind = TokenKind::String;
    } else if (ident_start_at(s, i)) {
      i = scan_identifier(s, i);
      kind = TokenKind::Identifier;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      if (i + 1 < s.size() && s[i] == '.' && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
        ++i;
        while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      }
      kind = TokenKind::Number;
    } else if (is_single_symbol(c)) {
      ++i;
      kind = TokenKind::Symbol;
    } else if (is_symbol_char(c)) {
      while (i < s.size() && is_symbol_char(s[i])) ++i;
      kind = TokenKind::Symbol;
    } else {
      i += utf8_length(static_cast<unsigned char>(c));
      i = std::min(i, s.size());
      kind = TokenKind::Symbol;
    }
    out.push_back(Token{kind, std::string(s.substr(start, i - start)), start, i - start});
  }
  return out;
}

bool tokens_equal(std::string_view a, std::string_view b) {
  auto ta = tokenize(a);
  auto tb = tokenize(b);
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].kind != tb[i].kind || ta[i].text != tb[i].text) return false;
  }
  return true;
}

std::optional<Declaration> classify(const Sentence& sentence) {
  if (sentence.bullet) return std::nullopt;
  auto toks = tokenize(sentence.code);
  std::size_t i = 0;
  while (i < toks.size()) {
    if (is_sym(toks[i], "#") && i + 1 < toks.size() && is_sym(toks[i + 1], "[")) {
      int depth = 0;
      for (++i; i < toks.size(); ++i) {
        if (is_sym(toks[i], "[")) ++depth;
        else if (is_sym(toks[i], "]") && --depth == 0) break;
      }
      ++i;
      continue;
    }
    if (is_ident(toks[i]) && is_modifier(toks[i].text)) {
      ++i;
      continue;
    }
    break;
  }
  if (i >= toks.size() || !is_ident(toks[i])) return std::nullopt;

  Declaration d;
  d.keyword = toks[i].text;
  auto next_is = [&](std::size_t k, std::string_view w) {
    return k < toks.size() && is_ident(toks[k]) && toks[k].text == w;
  };

  if (d.keyword == "Module") {
    std::size_t k = i + 1;
    if (next_is(k, "Type")) {
      d.kind = DeclKind::ModuleType;
      ++k;
    } else {
      d.kind = DeclKind::Module;
    }
    while (next_is(k, "Import") || next_is(k, "Export")) ++k;
    if (k < toks.size() && is_ident(toks[k])) {
      d.names.push_back(toks[k].text);
      d.name_end = toks[k].offset + toks[k].length;
    }
    d.opens_block = !has_top_level(toks, k, ":=");
    return d;
  }
  if (d.keyword == "Reserved" || d.keyword == "Tactic" || d.keyword == "Number" ||
      d.keyword == "String" || d.keyword == "Declare") {
    d.kind = d.keyword == "Tactic" ? DeclKind::Ltac : DeclKind::Command;
    return d;
  }

  auto kw = std::find_if(kKeywords.begin(), kKeywords.end(),
                         [&](const KeywordKind& k) { return k.keyword == d.keyword; });
  if (kw == kKeywords.end()) {
    d.kind = DeclKind::Command;
    return d;
  }
  d.kind = kw->kind;
  const std::size_t k = i + 1;

  switch (d.kind) {
    case DeclKind::Notation:
      if (k < toks.size() && (is_ident(toks[k]) || toks[k].kind == TokenKind::String)) {
        d.names.push_back(toks[k].text);
        d.name_end = toks[k].offset + toks[k].length;
      }
      break;
    case DeclKind::Assumption:
      add_assumption_names(toks, k, d.names);
      break;
    default:
      if (k < toks.size() && is_ident(toks[k])) {
        d.names.push_back(toks[k].text);
        d.name_end = toks[k].offset + toks[k].length;
      }
      if (d.keyword == "Fixpoint" || d.keyword == "CoFixpoint" || d.kind == DeclKind::Inductive) {
        add_mutual_names(toks, k, d.names);
      }
      if (d.kind == DeclKind::Inductive) add_constructors(toks, k, d.names);
      if (d.kind == DeclKind::Section) d.opens_block = true;
      break;
  }
  return d;
}

bool mentions_admission(std::string_view source) {
  for (const auto& tok : tokenize(blank_comments(source))) {
    if (tok.kind != TokenKind::Identifier) continue;
    std::string_view rest = tok.text;
    while (true) {
      auto dot = rest.find('.');
      auto part = rest.substr(0, dot);
      if (part == "Admitted" || part == "admit" || part == "Abort" || part == "Admit" || part == "give_up") return true;
      if (dot == std::string_view::npos) break;
      rest.remove_prefix(dot + 1);
    }
  }
  return false;
}

}  // namespace rocq::vernac
