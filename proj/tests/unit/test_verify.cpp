#include <doctest.h>

#include <map>

#include "rocq/backend/mock.hpp"
#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"
#include "rocq/verify/verify.hpp"
#include "testlib.hpp"

using namespace rocq;
using namespace rocq::verify;

namespace {
std::optional<ErrorKind> kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}
}  // namespace

TEST_CASE("verify corpus") {
  const auto cases = testing::load_verify_corpus(testing::data_dir() / "verify");
  int accepted = 0;
  int rejected = 0;
  std::map<std::string, int> per_category;
  for (const auto& c : cases) {
    (c.accepted ? accepted : rejected)++;
    per_category[c.category]++;
  }
  CHECK(rejected >= 20);
  CHECK(accepted >= 5);
  CHECK(per_category["admission"] >= 14);
  CHECK(per_category["redefinition"] >= 6);

  for (const auto& [name, outcome] : testing::run_verify_corpus(cases)) {
    CAPTURE(name);
    CHECK_MESSAGE(outcome.pass, outcome.detail);
  }
}

TEST_CASE("stub parsing") {
  const std::string src = "Definition d := 1.\n\nLemma helper : True.\nProof. exact I. Qed.\n\n"
                          "Theorem main (n : nat) : n + 0 = n.\nProof.\nAdmitted.\n(* tail *)\n";
  auto stub = CanonicalStub::from_source(src);
  CHECK(stub.theorem_name == "main");
  CHECK(stub.statement == "(n : nat) : n + 0 = n");
  CHECK(stub.theorem_sentence == "Theorem main (n : nat) : n + 0 = n.");
  CHECK(stub.prelude.ends_with("Qed.\n\n"));
  CHECK(stub.epilogue == "\n(* tail *)\n");
  CHECK(stub.with_proof("Proof. lia. Qed.") == stub.prelude + stub.theorem_sentence + "\nProof. lia. Qed." + stub.epilogue);

  CHECK(kind_of([&] { CanonicalStub::from_source(src, "helper"); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { CanonicalStub::from_source(src, "absent"); }) == ErrorKind::NameNotFound);
  CHECK(kind_of([] { CanonicalStub::from_source("Lemma a : True. Proof. exact I. Qed."); }) == ErrorKind::NameNotFound);
  CHECK(kind_of([] { CanonicalStub::from_source("Definition a := 1.\nLemma a : True.\nAdmitted."); }) ==
        ErrorKind::MultipleDefinitions);
}

TEST_CASE("extract_theorem and find_theorems") {
  const std::string src = "Module M.\nLemma x : True.\nProof. exact I. Qed.\nEnd M.\nSection S.\n"
                          "Lemma y (*c*) : False -> False.\nProof. auto. Qed.\nEnd S.\n";
  auto sites = find_theorems(vernac::split_sentences(src));
  REQUIRE(sites.size() == 2);
  CHECK(sites[0].module_depth == 1);
  CHECK(sites[1].depth == 1);
  CHECK(sites[1].module_depth == 0);
  CHECK(extract_theorem(src, "y") == "False -> False");
  CHECK(kind_of([&] { extract_theorem(src, "z"); }) == ErrorKind::NameNotFound);
}

TEST_CASE("assumption listings") {
  CHECK(parse_assumptions("Closed under the global context\n").empty());
  auto ax = parse_assumptions(
      "Axioms:\nclassic : forall P : Prop, P \\/ ~ P\nfunctional_extensionality_dep :\n"
      "  forall (A : Type) (B : A -> Type) (f g : forall x : A, B x),\n  (forall x : A, f x = g x) -> f = g\n");
  CHECK(ax == std::set<std::string>{"classic", "functional_extensionality_dep"});

  auto mixed = parse_assumptions("Section Variables:\nn : nat\nAxioms:\nax : False\n"
                                 "Constants/Inductives relying on type-in-type:\nbad\n");
  CHECK(mixed == std::set<std::string>{"n", "ax", "unsafe:Constants/Inductives relying on type-in-type:bad"});

  CHECK(kind_of([] { parse_assumptions("garbage\n"); }) == ErrorKind::MalformedAssumptionBlock);
  CHECK(kind_of([] { parse_assumptions("Axioms:\n"); }) == ErrorKind::MalformedAssumptionBlock);
}

TEST_CASE("whitelist") {
  const auto& w = AxiomWhitelist::defaults();
  for (const char* name : {"classic", "Coq.Logic.Classical_Prop.classic", "ClassicalDedekindReals.sig_forall_dec",
                           "sig_not_dec", "FunctionalExtensionality.functional_extensionality_dep"}) {
    CHECK(w.allows(name));
  }
  for (const char* name : {"Candidate.classic", "proof_irrelevance", "Classical_Prop.NNPP", "unsafe:x:classic"}) {
    CHECK_FALSE(w.allows(name));
  }
  auto v = check_axioms({"zeta", "classic", "alpha"}, w);
  REQUIRE(v.size() == 2);
  CHECK(v[0].detail == "alpha");
  CHECK(v[1].detail == "zeta");

  auto custom = AxiomWhitelist::parse("# c\nfoo\n\n  bar  \n", "custom");
  CHECK(custom.allowed == std::set<std::string>{"foo", "bar"});
  CHECK(kind_of([] { AxiomWhitelist::load("/nonexistent/whitelist.txt"); }) == ErrorKind::FileNotFound);
}

TEST_CASE("sandbox layout") {
  auto stub = CanonicalStub::from_source(text::read_file(testing::data_dir() / "verify/stubs/add_comm.v"));
  const std::string candidate = "Lemma helper : True.\nProof. exact I. Qed.\n"
                                "Theorem renamed : forall n m : nat, n + m = m + n.\nProof. lia. Qed.";
  auto sb = build_sandbox(candidate, stub);
  CHECK(sb.applied == "renamed");
  auto lines = text::split_lines(sb.source);
  CHECK(lines.at(static_cast<std::size_t>(sb.line_offset - 2)) == "Module Candidate.");
  CHECK(lines.at(static_cast<std::size_t>(sb.line_offset - 1)) == "Lemma helper : True.");
  CHECK(lines.at(static_cast<std::size_t>(sb.candidate_end_line - 1)) == "End Candidate.");
  CHECK(sb.source.ends_with("Proof. first [ exact Candidate.renamed | apply Candidate.renamed ]. Qed.\n"
                            "Locate rocq_tools_output_marker.\nPrint Assumptions add_comm_stub.\n"));

  CHECK(discover_candidate_theorem("Theorem add_comm_stub : True. Proof. exact I. Qed.", stub) == "add_comm_stub");
  CHECK(discover_candidate_theorem("Lemma a : True. Proof. exact I. Qed.", stub) == "add_comm_stub");
  CHECK(direct_probe("Lemma a : True.", "a") == "Lemma a : True.\nLocate rocq_tools_output_marker.\nPrint Assumptions a.\n");
}

TEST_CASE("static checks leave verbatim stub material alone") {
  auto stub = CanonicalStub::from_source(text::read_file(testing::data_dir() / "verify/stubs/color_cycle.v"));
  const std::string verbatim = stub.prelude + "Theorem next_cycle : forall c : color, next (next (next c)) = c.\n"
                                              "Proof. destruct c; reflexivity. Qed.\n";
  CHECK(static_integrity_checks(verbatim, stub, "next_cycle").empty());

  const std::string collapsed = "Inductive color : Type := Red.\nDefinition next (c : color) : color := c.\n"
                                "Theorem next_cycle : forall c : color, next (next (next c)) = c.\nProof. reflexivity. Qed.\n";
  auto v = static_integrity_checks(collapsed, stub, "next_cycle");
  // color, its constructor Red, and next all differ from the stub.
  REQUIRE(v.size() == 3);
  for (const auto& x : v) CHECK(x.kind == ViolationKind::StubIdentifierRedefined);

  // Declarations after the theorem cannot change its meaning.
  CHECK(static_integrity_checks(verbatim + "Definition next := 0.\n", stub, "next_cycle").empty());
  auto ax = static_integrity_checks("Axiom cheat : False.\n" + verbatim, stub, "next_cycle");
  REQUIRE(ax.size() == 1);
  CHECK(ax[0] == Violation{ViolationKind::NonWhitelistedAxiom, "cheat"});
}

TEST_CASE("verify needs a compiler") {
  backend::MockScript s;
  s.caps = {false, false};
  backend::MockBackend b(s);
  auto stub = CanonicalStub::from_source(text::read_file(testing::data_dir() / "verify/stubs/add_comm.v"));
  CHECK(kind_of([&] { verify::verify(b, "x.", stub, AxiomWhitelist::defaults()); }) == ErrorKind::BackendUnavailable);
}

TEST_CASE("verdict json") {
  VerifyVerdict v;
  v.phase = Phase::ModuleSandbox;
  v.violations.push_back(Violation{ViolationKind::AdmittedPresent, "x"});
  auto j = nlohmann::json(v);
  CHECK(j["accepted"] == false);
  CHECK(j["phase"] == "ModuleSandbox");
  CHECK(j["violations"][0]["kind"] == "AdmittedPresent");
}
