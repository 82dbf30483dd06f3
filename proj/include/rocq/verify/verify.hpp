#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rocq/backend/backend.hpp"
#include "rocq/diagnostics/report.hpp"
#include "rocq/verify/stub.hpp"

namespace rocq::verify {

inline constexpr std::string_view kSandboxModule = "Candidate";

struct Sandbox {
  std::string source;
  int line_offset = 1;        // line where the candidate text begins
  int candidate_end_line = 1; // line of `End Candidate.`
  std::string applied;        // candidate theorem the wrapper applies
};

// Name of the candidate theorem standing for the stub: the stub's own name if
// the candidate declares it at top level, else the single top-level theorem
// whose statement is token-equal to the stub's. Falls back to the stub name.
std::string discover_candidate_theorem(std::string_view candidate, const CanonicalStub& stub);

Sandbox build_sandbox(std::string_view candidate, const CanonicalStub& stub);

// Reads `Print Assumptions` output. Entries under "Axioms:" and "Section
// Variables:" yield their names; entries under any other header (type-in-type,
// unchecked guard or positivity, ...) yield "unsafe:<header>:<name>", which no
// whitelist contains. Throws MalformedAssumptionBlock.
std::set<std::string> parse_assumptions(std::string_view raw);

struct AxiomWhitelist {
  std::set<std::string> allowed;
  std::string description;

  static std::string_view default_text();
  static const AxiomWhitelist& defaults();
  static AxiomWhitelist parse(std::string_view doc, std::string description = {});
  static AxiomWhitelist load(const std::filesystem::path& path);

  bool allows(std::string_view name) const { return allowed.count(std::string(name)) > 0; }
};

enum class ViolationKind {
  AdmittedPresent,
  NonWhitelistedAxiom,
  StatementMismatch,
  StubIdentifierRedefined,
  CompileFailed,
  ApplicationFailed,
};

struct Violation {
  ViolationKind kind;
  std::string detail;

  bool operator==(const Violation&) const = default;
  auto operator<=>(const Violation&) const = default;
};

std::string_view to_string(ViolationKind k);

// One NonWhitelistedAxiom per axiom outside the whitelist, in name order.
std::vector<Violation> check_axioms(const std::set<std::string>& axioms, const AxiomWhitelist& whitelist);

enum class Phase { ModuleSandbox, DirectWithStaticChecks, None };
std::string_view to_string(Phase p);

struct VerifyVerdict {
  bool accepted = false;
  Phase phase = Phase::None;
  std::set<std::string> axioms_used;
  std::vector<Violation> violations;
  std::optional<diagnostics::CompileReport> report;  // the compile that decided
  std::string applied_theorem;
};

void to_json(nlohmann::json& j, const VerifyVerdict& v);

struct VerifyOptions {
  std::optional<std::chrono::seconds> timeout;
  const diagnostics::CategoryRules* rules = nullptr;  // defaults when null
};

// Throws BackendUnavailable without a compiler. Everything that is wrong
// with the candidate ends up in the verdict.
VerifyVerdict verify(const backend::ProverBackend& backend, std::string_view candidate, const CanonicalStub& stub,
                     const AxiomWhitelist& whitelist, const VerifyOptions& options = {});

// Source compiled by the second phase: the candidate followed by an
// assumption query on `theorem`.
std::string direct_probe(std::string_view candidate, std::string_view theorem);

// Declarations in `candidate`, before its theorem `theorem`, that could change
// what the stub statement means. Used by the second phase.
std::vector<Violation> static_integrity_checks(std::string_view candidate, const CanonicalStub& stub,
                                               std::string_view theorem);

}  // namespace rocq::verify
