#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rocq/vernac/lexer.hpp"

namespace rocq::verify {

// A problem file: definitions followed by one theorem left `Admitted.`
struct CanonicalStub {
  std::string source;
  std::string theorem_name;
  std::string statement;         // what follows the name, without the leading ':'
  std::string prelude;           // source text before the theorem sentence
  std::string theorem_sentence;  // the theorem sentence, verbatim
  std::string epilogue;          // everything after the closing `Admitted.`

  // Picks `name`, or the last theorem whose proof is `Admitted.` when no name
  // is given. Throws NameNotFound, MultipleDefinitions, or InvalidArgument
  // when the chosen theorem is not closed by `Admitted.`.
  static CanonicalStub from_source(std::string_view source, std::optional<std::string> name = std::nullopt);

  // Stub text with the admitted proof replaced by `proof` (e.g. "Proof. lia. Qed.").
  std::string with_proof(std::string_view proof) const;
};

struct TheoremSite {
  std::size_t sentence = 0;  // index into split_sentences(source)
  std::string name;
  std::string statement;
  int depth = 0;         // Module/Section nesting
  int module_depth = 0;  // Module nesting only: qualification prefixes
};

// Every Theorem-like declaration, in source order.
std::vector<TheoremSite> find_theorems(const std::vector<vernac::Sentence>& sentences);

// Statement of theorem `name`. Throws NameNotFound or MultipleDefinitions
// (the name is declared more than once, by any kind of declaration).
std::string extract_theorem(std::string_view source, std::string_view name);

// Statement part of a theorem sentence: text after the name, comment-free,
// with a leading ':' dropped. Binders before the colon are kept.
std::string statement_of(const vernac::Sentence& sentence, const vernac::Declaration& decl);

bool detect_admitted(std::string_view source);

}  // namespace rocq::verify
