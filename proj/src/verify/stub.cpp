#include "rocq/verify/stub.hpp"

#include <algorithm>

#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"

namespace rocq::verify {

using vernac::DeclKind;

std::string statement_of(const vernac::Sentence& sentence, const vernac::Declaration& decl) {
  auto rest = text::trim(std::string_view(sentence.code).substr(std::min(decl.name_end, sentence.code.size())));
  if (rest.starts_with(':') && !rest.starts_with(":=")) rest = text::trim(rest.substr(1));
  return std::string(rest);
}

std::vector<TheoremSite> find_theorems(const std::vector<vernac::Sentence>& sentences) {
  std::vector<TheoremSite> out;
  std::vector<bool> blocks;  // true for modules
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto decl = vernac::classify(sentences[i]);
    if (!decl) continue;
    if (decl->kind == DeclKind::End) {
      if (!blocks.empty()) blocks.pop_back();
    } else if (decl->opens_block) {
      blocks.push_back(decl->kind != DeclKind::Section);
    } else if (decl->kind == DeclKind::Theorem && !decl->names.empty()) {
      const int modules = static_cast<int>(std::count(blocks.begin(), blocks.end(), true));
      out.push_back(TheoremSite{i, decl->names.front(), statement_of(sentences[i], *decl),
                                static_cast<int>(blocks.size()), modules});
    }
  }
  return out;
}

namespace {

std::size_t declaration_count(const std::vector<vernac::Sentence>& sentences, std::string_view name) {
  std::size_t n = 0;
  for (const auto& s : sentences) {
    auto decl = vernac::classify(s);
    if (!decl || decl->kind == DeclKind::End || decl->kind == DeclKind::Command) continue;
    for (const auto& declared : decl->names) {
      if (declared == name) ++n;
    }
  }
  return n;
}

const TheoremSite& locate(const std::vector<vernac::Sentence>& sentences, const std::vector<TheoremSite>& theorems,
                          std::string_view name) {
  const TheoremSite* found = nullptr;
  for (const auto& t : theorems) {
    if (t.name == name) found = &t;
  }
  if (!found) raise(ErrorKind::NameNotFound, "no theorem named " + std::string(name));
  if (declaration_count(sentences, name) > 1) {
    raise(ErrorKind::MultipleDefinitions, std::string(name) + " is declared more than once");
  }
  return *found;
}

}  // namespace

std::string extract_theorem(std::string_view source, std::string_view name) {
  auto sentences = vernac::split_sentences(source);
  return locate(sentences, find_theorems(sentences), name).statement;
}

bool detect_admitted(std::string_view source) { return vernac::mentions_admission(source); }

CanonicalStub CanonicalStub::from_source(std::string_view source, std::optional<std::string> name) {
  auto sentences = vernac::split_sentences(source);
  auto theorems = find_theorems(sentences);

  // Index of the sentence closing the proof with `Admitted`, if that is how
  // the proof right after sentence `i` ends.
  auto admitted_after = [&](std::size_t i) -> std::optional<std::size_t> {
    std::size_t k = i + 1;
    if (k < sentences.size() && sentences[k].code == "Proof") ++k;
    if (k < sentences.size() && sentences[k].code == "Admitted") return k;
    return std::nullopt;
  };

  if (!name) {
    for (auto it = theorems.rbegin(); it != theorems.rend(); ++it) {
      if (admitted_after(it->sentence)) {
        name = it->name;
        break;
      }
    }
    if (!name) raise(ErrorKind::NameNotFound, "stub has no theorem closed by Admitted");
  }

  const TheoremSite& site = locate(sentences, theorems, *name);
  auto closing = admitted_after(site.sentence);
  if (!closing) raise(ErrorKind::InvalidArgument, "theorem " + *name + " is not closed by Admitted");
  if (site.statement.empty()) raise(ErrorKind::InvalidArgument, "theorem " + *name + " has an empty statement");

  CanonicalStub stub;
  stub.source = std::string(source);
  stub.theorem_name = *name;
  stub.statement = site.statement;
  const auto& thm = sentences[site.sentence];
  stub.prelude = std::string(source.substr(0, thm.begin));
  stub.theorem_sentence = thm.text;
  stub.epilogue = std::string(source.substr(sentences[*closing].end));
  return stub;
}

std::string CanonicalStub::with_proof(std::string_view proof) const {
  return prelude + theorem_sentence + "\n" + std::string(proof) + epilogue;
}

}  // namespace rocq::verify
