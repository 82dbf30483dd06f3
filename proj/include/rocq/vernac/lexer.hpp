#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Lexical view of Rocq source text. Nothing here runs the prover: comments
// (nested, with string literals inside them honored) and string literals are
// recognised so that keyword scans never see their contents.
namespace rocq::vernac {

struct Sentence {
  std::size_t begin = 0;  // byte offset of the first non-blank character
  std::size_t end = 0;    // one past the terminator
  int line = 1;           // 1-based line of `begin`
  std::string text;       // raw slice [begin, end)
  std::string code;       // comments blanked, terminator dropped, trimmed
  bool bullet = false;    // `-`, `+`, `*`, `{` or `}` focusing sentence
  bool terminated = true; // false for trailing text without a final '.'
};

std::vector<Sentence> split_sentences(std::string_view source);

// Byte offset of the first comment that is never closed, if any.
std::optional<std::size_t> unterminated_comment(std::string_view source);

// Replaces every comment character by a space, keeping newlines so that line
// numbers survive.
std::string blank_comments(std::string_view source);

enum class TokenKind { Identifier, Number, String, Symbol };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset = 0;  // into the tokenized text
  std::size_t length = 0;
};

// Tokenizes comment-free text. Qualified names (`Nat.add`) are one token.
std::vector<Token> tokenize(std::string_view code);

// Token-level equality of two comment-free snippets: whitespace and layout
// are irrelevant, symbols and identifiers must match exactly.
bool tokens_equal(std::string_view a, std::string_view b);

enum class DeclKind {
  Theorem,     // Theorem, Lemma, Fact, Remark, Corollary, Proposition, Property, Example
  Definition,  // Definition, Fixpoint, CoFixpoint, Function, Let, Instance, ...
  Inductive,   // Inductive, CoInductive, Variant, Record, Structure, Class
  Assumption,  // Axiom(s), Parameter(s), Conjecture, Hypothesis, Variable(s)
  Notation,    // Notation, Infix (abbreviations and string notations)
  Module,
  ModuleType,
  Section,
  End,
  Ltac,
  Command,     // anything else with a recognizable leading keyword
};

struct Declaration {
  DeclKind kind = DeclKind::Command;
  std::string keyword;             // leading keyword after attributes
  std::vector<std::string> names;  // primary name first, then constructors etc.
  bool opens_block = false;        // Module/Section that is closed by `End`
  std::size_t name_end = 0;        // offset in Sentence::code just past the primary name
};

std::optional<Declaration> classify(const Sentence& sentence);

// True when an identifier token (or a component of a qualified one) equals
// one of the proof-abandoning keywords: Admitted, admit, Admit (Obligations),
// Abort, give_up.
bool mentions_admission(std::string_view source);

}  // namespace rocq::vernac
