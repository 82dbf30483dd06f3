#include "rocq/verify/verify.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"
#include "rocq/embedded/axiom_whitelist.hpp"
#include "rocq/vernac/marker.hpp"

namespace rocq::verify {

using diagnostics::CompileReport;
using diagnostics::Diagnostic;
using diagnostics::Severity;
using vernac::DeclKind;

namespace {

int count_lines(std::string_view s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

void ensure_newline(std::string& s) {
  if (!s.empty() && s.back() != '\n') s += '\n';
}

const TheoremSite* top_level_match(const std::vector<TheoremSite>& theorems, const CanonicalStub& stub,
                                   bool require_statement) {
  for (const auto& t : theorems) {
    if (t.module_depth != 0 || t.name != stub.theorem_name) continue;
    if (!require_statement || vernac::tokens_equal(t.statement, stub.statement)) return &t;
  }
  const TheoremSite* unique = nullptr;
  for (const auto& t : theorems) {
    if (t.module_depth != 0 || !vernac::tokens_equal(t.statement, stub.statement)) continue;
    if (unique) return nullptr;  // ambiguous
    unique = &t;
  }
  return unique;
}

// Module/Section blocks must close inside the candidate, and the candidate
// must not end inside a sentence, comment or string: either would let its text
// swallow or re-scope the wrapper that follows it.
std::optional<std::string> structural_escape(const std::vector<vernac::Sentence>& sentences) {
  int depth = 0;
  for (const auto& s : sentences) {
    if (!s.terminated) return "candidate ends inside an unterminated sentence, comment or string (line " +
                              std::to_string(s.line) + ")";
    auto decl = vernac::classify(s);
    if (!decl) continue;
    if (decl->kind == DeclKind::End) {
      if (--depth < 0) return "`" + s.code + "` closes a block the candidate did not open (line " +
                              std::to_string(s.line) + ")";
    } else if (decl->opens_block) {
      ++depth;
    }
  }
  if (depth != 0) return std::string("candidate leaves a Module or Section open");
  return std::nullopt;
}

// Flags and attributes that turn off a kernel check. Print Assumptions would
// report most of them, but not in a form every version agrees on.
std::vector<Violation> kernel_bypass(const std::vector<vernac::Sentence>& sentences) {
  static const std::regex flag(R"re(^(#\[[^\]]*\]\s*)*(Local\s+|Global\s+|Export\s+)?(Unset\s+(Guard|Positivity|Universe)\s+Checking|Set\s+Type\s+In\s+Type)\b)re");
  static const std::regex attribute(R"re(#\[[^\]]*\b(bypass_check|universes\s*\(\s*typing\s*=\s*no)\b)re");
  std::vector<Violation> out;
  for (const auto& s : sentences) {
    const std::string code = text::collapse_whitespace(s.code);
    if (std::regex_search(code, flag) || std::regex_search(code, attribute)) {
      out.push_back(Violation{ViolationKind::NonWhitelistedAxiom, "unsafe:" + code});
    }
  }
  return out;
}

const Diagnostic* first_error(const CompileReport& r) {
  for (const auto& d : r.diagnostics) {
    if (d.severity == Severity::Error) return &d;
  }
  return nullptr;
}

std::string first_error_text(const CompileReport& r) {
  const Diagnostic* e = first_error(r);
  if (!e) return "compilation failed";
  // Skip the `In environment` context block; the complaint comes after it.
  auto lines = text::split_lines(e->message);
  std::size_t k = 0;
  if (!lines.empty() && text::trim(lines[0]) == "In environment") {
    static const std::regex hyp(R"re(^[A-Za-z_][\w']*(, [A-Za-z_][\w']*)* :=? .*)re");
    k = 1;
    while (k < lines.size() && std::regex_match(lines[k].begin(), lines[k].end(), hyp)) ++k;
  }
  std::string out;
  for (; k < lines.size(); ++k) out += std::string(lines[k]) + " ";
  out = text::collapse_whitespace(out);
  if (out.empty()) out = std::string(lines.empty() ? std::string_view("compilation failed") : lines[0]);
  return out;
}

// Moves candidate-region diagnostics into candidate coordinates and re-renders.
void remap_to_candidate(CompileReport& report, const Sandbox& sb, std::string_view candidate) {
  std::string human;
  for (auto& d : report.diagnostics) {
    if (d.line >= sb.line_offset && d.line < sb.candidate_end_line) {
      d.line -= sb.line_offset - 1;
      d.file = "candidate";
      auto lines = text::split_lines(candidate);
      d.excerpt = std::string(lines[static_cast<std::size_t>(d.line - 1)]);
      human += diagnostics::render_diagnostic(d, candidate);
    } else {
      d.file = "sandbox";
      human += diagnostics::render_diagnostic(d, sb.source);
    }
  }
  report.human_text = human + diagnostics::render_summary(report.diagnostics);
}

void dedupe(std::vector<Violation>& vs) {
  std::vector<Violation> out;
  for (auto& v : vs) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
  }
  vs = std::move(out);
}

struct AssumptionRead {
  std::set<std::string> axioms;
  std::optional<Violation> problem;
};

AssumptionRead read_assumptions(const CompileReport& report) {
  AssumptionRead r;
  auto section = vernac::harvest_after_marker(report.raw.out);
  if (!section) {
    r.problem = Violation{ViolationKind::CompileFailed, "assumption listing missing from compiler output"};
    return r;
  }
  try {
    r.axioms = parse_assumptions(*section);
  } catch (const Error& e) {
    r.problem = Violation{ViolationKind::CompileFailed, e.what()};
  }
  return r;
}

}  // namespace

std::string discover_candidate_theorem(std::string_view candidate, const CanonicalStub& stub) {
  auto theorems = find_theorems(vernac::split_sentences(candidate));
  if (const TheoremSite* t = top_level_match(theorems, stub, false)) return t->name;
  return stub.theorem_name;
}

Sandbox build_sandbox(std::string_view candidate, const CanonicalStub& stub) {
  Sandbox sb;
  sb.applied = discover_candidate_theorem(candidate, stub);
  std::string& src = sb.source;
  src = stub.prelude;
  ensure_newline(src);
  src += "Module " + std::string(kSandboxModule) + ".\n";
  sb.line_offset = count_lines(src) + 1;
  src += candidate;
  ensure_newline(src);
  sb.candidate_end_line = count_lines(src) + 1;
  src += "End " + std::string(kSandboxModule) + ".\n";
  src += stub.theorem_sentence + "\n";
  const std::string q = std::string(kSandboxModule) + "." + sb.applied;
  src += "Proof. first [ exact " + q + " | apply " + q + " ]. Qed.\n";
  src += std::string(vernac::kMarkerSentence) + "\n";
  src += "Print Assumptions " + stub.theorem_name + ".\n";
  return sb;
}

std::set<std::string> parse_assumptions(std::string_view raw) {
  std::set<std::string> out;
  std::optional<std::string> header;
  std::map<std::string, int> entries;  // per header
  bool closed = false;
  for (auto line : text::split_lines(raw)) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    if (text::trim(line).starts_with("Closed under the global context")) {
      closed = true;
      continue;
    }
    if (line.front() == ' ' || line.front() == '\t') continue;  // continuation of a long type
    if (line.back() == ':' && line.find(" :") == std::string_view::npos) {
      header = std::string(line.substr(0, line.size() - 1));
      entries.emplace(*header, 0);
      continue;
    }
    if (!header) continue;
    auto name = std::string(line.substr(0, line.find_first_of(" \t")));
    ++entries[*header];
    if (*header == "Axioms" || *header == "Section Variables") out.insert(name);
    else out.insert("unsafe:" + *header + ":" + name);
  }
  if (closed && entries.empty()) return {};
  if (entries.empty()) raise(ErrorKind::MalformedAssumptionBlock, "no assumption listing found");
  for (const auto& [h, n] : entries) {
    if (n == 0) raise(ErrorKind::MalformedAssumptionBlock, "assumption section `" + h + "` has no entries");
  }
  return out;
}

std::string_view AxiomWhitelist::default_text() { return embedded::axiom_whitelist; }

const AxiomWhitelist& AxiomWhitelist::defaults() {
  static const AxiomWhitelist w =
      parse(default_text(), "classical logic, classical Dedekind reals, functional extensionality");
  return w;
}

AxiomWhitelist AxiomWhitelist::parse(std::string_view doc, std::string description) {
  AxiomWhitelist w;
  w.description = std::move(description);
  for (const auto& line : text::data_lines(doc)) {
    auto name = text::trim(line);
    w.allowed.insert(std::string(name.substr(0, name.find_first_of(" \t"))));
  }
  return w;
}

AxiomWhitelist AxiomWhitelist::load(const std::filesystem::path& path) {
  return parse(text::read_file(path), path.string());
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::AdmittedPresent: return "AdmittedPresent";
    case ViolationKind::NonWhitelistedAxiom: return "NonWhitelistedAxiom";
    case ViolationKind::StatementMismatch: return "StatementMismatch";
    case ViolationKind::StubIdentifierRedefined: return "StubIdentifierRedefined";
    case ViolationKind::CompileFailed: return "CompileFailed";
    case ViolationKind::ApplicationFailed: return "ApplicationFailed";
  }
  return "CompileFailed";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::ModuleSandbox: return "ModuleSandbox";
    case Phase::DirectWithStaticChecks: return "DirectWithStaticChecks";
    case Phase::None: return "None";
  }
  return "None";
}

std::vector<Violation> check_axioms(const std::set<std::string>& axioms, const AxiomWhitelist& whitelist) {
  std::vector<Violation> out;
  for (const auto& a : axioms) {
    if (!whitelist.allows(a)) out.push_back(Violation{ViolationKind::NonWhitelistedAxiom, a});
  }
  return out;
}

void to_json(nlohmann::json& j, const VerifyVerdict& v) {
  j = nlohmann::json::object();
  j["accepted"] = v.accepted;
  j["phase"] = to_string(v.phase);
  j["axioms_used"] = v.axioms_used;
  auto vs = nlohmann::json::array();
  for (const auto& x : v.violations) vs.push_back({{"kind", to_string(x.kind)}, {"detail", x.detail}});
  j["violations"] = std::move(vs);
  j["applied_theorem"] = v.applied_theorem;
  j["report"] = v.report ? nlohmann::json(*v.report) : nlohmann::json();
}

std::string direct_probe(std::string_view candidate, std::string_view theorem) {
  std::string src(candidate);
  ensure_newline(src);
  src += std::string(vernac::kMarkerSentence) + "\n";
  src += "Print Assumptions " + std::string(theorem) + ".\n";
  return src;
}

std::vector<Violation> static_integrity_checks(std::string_view candidate, const CanonicalStub& stub,
                                               std::string_view theorem) {
  std::vector<Violation> out;
  auto redefined = [&](std::string detail) {
    out.push_back(Violation{ViolationKind::StubIdentifierRedefined, std::move(detail)});
  };

  // What the stub declares, and the sentences that declare it.
  std::vector<std::string> stub_codes;
  std::map<std::string, std::vector<std::string>> stub_decls;
  for (const auto& s : vernac::split_sentences(stub.prelude)) {
    stub_codes.push_back(s.code);
    auto decl = vernac::classify(s);
    if (!decl || decl->kind == DeclKind::End || decl->kind == DeclKind::Command) continue;
    for (const auto& n : decl->names) stub_decls[n].push_back(s.code);
  }
  auto in_stub = [&](const std::string& code) {
    return std::any_of(stub_codes.begin(), stub_codes.end(),
                       [&](const std::string& c) { return vernac::tokens_equal(c, code); });
  };

  // Names and symbols the statement depends on.
  std::set<std::string> stmt_idents;
  std::set<std::string> stmt_symbols;
  for (const auto& tok : vernac::tokenize(stub.statement)) {
    if (tok.kind == vernac::TokenKind::Symbol) stmt_symbols.insert(tok.text);
    if (tok.kind != vernac::TokenKind::Identifier) continue;
    std::string_view rest = tok.text;
    while (true) {
      auto dot = rest.find('.');
      stmt_idents.insert(std::string(rest.substr(0, dot)));
      if (dot == std::string_view::npos) break;
      rest.remove_prefix(dot + 1);
    }
  }

  auto sentences = vernac::split_sentences(candidate);
  std::size_t stop = sentences.size();
  for (const auto& t : find_theorems(sentences)) {
    if (t.module_depth == 0 && t.name == theorem) {
      stop = t.sentence;
      break;
    }
  }

  std::map<std::string, int> seen;
  int depth = 0;
  for (std::size_t i = 0; i < stop; ++i) {
    const auto& s = sentences[i];
    auto decl = vernac::classify(s);
    if (!decl) continue;
    if (decl->kind == DeclKind::End) {
      depth = std::max(0, depth - 1);
      continue;
    }
    const bool verbatim = in_stub(s.code);

    if (decl->kind == DeclKind::Command) {
      const auto& kw = decl->keyword;
      if ((kw == "Open" || kw == "Close" || kw == "Bind" || kw == "Delimit") && !verbatim) {
        redefined("scope change before the theorem: " + s.code);
      } else if (kw == "Arguments" && !verbatim) {
        for (const auto& tok : vernac::tokenize(s.code)) {
          if (tok.kind == vernac::TokenKind::Identifier && (stub_decls.count(tok.text) || stmt_idents.count(tok.text))) {
            redefined("argument settings changed for " + tok.text);
            break;
          }
        }
      }
      continue;
    }

    if (decl->kind == DeclKind::Assumption) {
      const bool section_local = depth > 0 && (decl->keyword.starts_with("Variable") || decl->keyword.starts_with("Hypothes"));
      if (!section_local) {
        for (const auto& n : decl->names) out.push_back(Violation{ViolationKind::NonWhitelistedAxiom, n});
      }
    }

    if (decl->kind == DeclKind::Notation && !verbatim && !decl->names.empty() && decl->names.front().starts_with('"')) {
      const std::string& quoted = decl->names.front();
      bool overlaps = false;
      for (const auto& tok : vernac::tokenize(quoted.substr(1, quoted.size() - 2))) {
        if (tok.kind == vernac::TokenKind::Symbol && stmt_symbols.count(tok.text)) overlaps = true;
        if (tok.kind == vernac::TokenKind::String) {
          auto inner = tok.text.substr(1, tok.text.size() - 2);  // quoted keyword like 'mod'
          if (stmt_idents.count(inner)) overlaps = true;
        }
      }
      if (overlaps) redefined("notation " + quoted + " reinterprets symbols of the statement");
      if (decl->opens_block) ++depth;
      continue;
    }

    for (const auto& n : decl->names) {
      if (n.starts_with('"')) continue;
      const int count = ++seen[n];
      if (auto it = stub_decls.find(n); it != stub_decls.end()) {
        if (count > 1) {
          redefined(n + " is declared more than once");
        } else if (!std::any_of(it->second.begin(), it->second.end(),
                                [&](const std::string& c) { return vernac::tokens_equal(c, s.code); })) {
          redefined(n + " differs from the stub's definition");
        }
      } else if (stmt_idents.count(n)) {
        redefined(n + " shadows a name used in the statement");
      }
    }
    if (decl->opens_block) ++depth;
  }
  dedupe(out);
  return out;
}

VerifyVerdict verify(const backend::ProverBackend& backend, std::string_view candidate, const CanonicalStub& stub,
                     const AxiomWhitelist& whitelist, const VerifyOptions& options) {
  if (!backend.capabilities().has_compiler) raise(ErrorKind::BackendUnavailable, "no compiler available");
  const auto& rules = options.rules ? *options.rules : diagnostics::CategoryRules::defaults();
  const backend::CompileOptions copts{options.timeout, std::nullopt};
  const auto timeout = options.timeout.value_or(backend.default_timeout());

  VerifyVerdict v;
  auto compile = [&](const std::string& source, std::string_view name) -> std::optional<CompileReport> {
    try {
      return diagnostics::make_report(backend.compile(source, copts), source, name, timeout, rules);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::CompilerNotFound) raise(ErrorKind::BackendUnavailable, e.what());
      if (e.kind() != ErrorKind::SpawnFailure) throw;
      v.violations.push_back(Violation{ViolationKind::CompileFailed, e.what()});
      return std::nullopt;
    }
  };

  const auto sentences = vernac::split_sentences(candidate);
  if (auto at = vernac::unterminated_comment(candidate)) {
    v.violations.push_back(Violation{ViolationKind::CompileFailed, "candidate ends inside an unterminated comment (offset " +
                                                                       std::to_string(*at) + ")"});
    if (detect_admitted(candidate)) v.violations.insert(v.violations.begin(), Violation{ViolationKind::AdmittedPresent, "proof abandoned with Admitted/admit/Abort"});
    return v;
  }
  if (auto escape = structural_escape(sentences)) {
    v.violations.push_back(Violation{ViolationKind::CompileFailed, *escape});
    if (detect_admitted(candidate)) v.violations.insert(v.violations.begin(), Violation{ViolationKind::AdmittedPresent, "proof abandoned with Admitted/admit/Abort"});
    return v;
  }
  if (auto bypass = kernel_bypass(sentences); !bypass.empty()) {
    v.violations = std::move(bypass);
    if (detect_admitted(candidate)) v.violations.insert(v.violations.begin(), Violation{ViolationKind::AdmittedPresent, "proof abandoned with Admitted/admit/Abort"});
    return v;
  }

  // Phase 1: the candidate lives in a module and the canonical statement must
  // be discharged by applying its theorem.
  const Sandbox sb = build_sandbox(candidate, stub);
  v.applied_theorem = sb.applied;
  auto report = compile(sb.source, "sandbox");
  if (!report) return v;
  v.phase = Phase::ModuleSandbox;
  v.report = report;

  if (detect_admitted(candidate)) {
    v.violations.push_back(Violation{ViolationKind::AdmittedPresent, "proof abandoned with Admitted/admit/Abort"});
    remap_to_candidate(*v.report, sb, candidate);
    return v;
  }

  if (report->success) {
    auto read = read_assumptions(*report);
    if (read.problem) {
      v.violations.push_back(*read.problem);
      return v;
    }
    v.axioms_used = std::move(read.axioms);
    v.violations = check_axioms(v.axioms_used, whitelist);
    v.accepted = v.violations.empty();
    return v;
  }

  const Diagnostic* err = first_error(*report);
  const bool application = !report->raw.timed_out && err && err->line > sb.candidate_end_line;
  if (!application) {
    v.violations.push_back(Violation{ViolationKind::CompileFailed, first_error_text(*report)});
    remap_to_candidate(*v.report, sb, candidate);
    return v;
  }
  const Violation app_failed{ViolationKind::ApplicationFailed, first_error_text(*report)};

  // Phase 2: the candidate compiled inside the module but its theorem did not
  // unify with the canonical statement across the module boundary (custom
  // inductive types are duplicated by the module). Fall back to compiling it
  // directly, guarded by syntactic integrity checks.
  auto theorems = find_theorems(sentences);
  const TheoremSite* found = top_level_match(theorems, stub, true);
  if (!found) {
    v.violations.push_back(app_failed);
    for (const auto& t : theorems) {
      if (t.module_depth == 0 && t.name == stub.theorem_name) {
        v.violations.push_back(Violation{ViolationKind::StatementMismatch,
                                         t.name + " states `" + t.statement + "`, expected `" + stub.statement + "`"});
        break;
      }
    }
    return v;
  }

  const std::string probe = direct_probe(candidate, found->name);
  auto direct = compile(probe, "candidate");
  if (!direct) return v;
  if (!direct->success) {
    v.violations.push_back(app_failed);
    return v;
  }

  v.phase = Phase::DirectWithStaticChecks;
  v.report = direct;
  v.applied_theorem = found->name;
  v.violations = static_integrity_checks(candidate, stub, found->name);
  auto read = read_assumptions(*direct);
  if (read.problem) {
    v.violations.push_back(*read.problem);
  } else {
    v.axioms_used = std::move(read.axioms);
    auto axiom_violations = check_axioms(v.axioms_used, whitelist);
    v.violations.insert(v.violations.end(), axiom_violations.begin(), axiom_violations.end());
  }
  dedupe(v.violations);
  v.accepted = v.violations.empty();
  return v;
}

}  // namespace rocq::verify
