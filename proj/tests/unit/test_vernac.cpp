#include <doctest.h>

#include "rocq/vernac/lexer.hpp"
#include "rocq/vernac/marker.hpp"

using namespace rocq::vernac;

TEST_CASE("sentences: terminators, qualified names, ellipsis") {
  auto s = split_sentences("Require Import Coq.Arith.Arith.\nLemma x : 0 = 0.\nProof. reflexivity. Qed.");
  REQUIRE(s.size() == 5);
  CHECK(s[0].code == "Require Import Coq.Arith.Arith");
  CHECK(s[1].line == 2);
  CHECK(s[1].code == "Lemma x : 0 = 0");
  CHECK(s[4].code == "Qed");
  CHECK(s[4].line == 3);

  auto e = split_sentences("intros... auto.");
  REQUIRE(e.size() == 1);
}

TEST_CASE("sentences: comments and strings hide dots") {
  auto s = split_sentences("(* a. b. (* nested. *) c. *)\nDefinition s := \"x. y\". (* tail *)");
  REQUIRE(s.size() == 1);
  CHECK(s[0].line == 2);
  CHECK(s[0].code == "Definition s := \"x. y\"");
}

TEST_CASE("sentences: bullets and braces") {
  auto s = split_sentences("split.\n- auto.\n+ { lia. }\n** easy.\n{| x := 1 |}.");
  std::vector<std::string> codes;
  for (const auto& x : s) codes.push_back(x.code);
  CHECK(codes == std::vector<std::string>{"split", "-", "auto", "+", "{", "lia", "}", "**", "easy", "{| x := 1 |}"});
  CHECK(s[1].bullet);
  CHECK_FALSE(s[2].bullet);
}

TEST_CASE("sentences: trailing text without a dot") {
  auto s = split_sentences("Lemma a : True.\nProof. exact I");
  REQUIRE(s.size() == 3);
  CHECK_FALSE(s[2].terminated);
  CHECK(s[2].code == "exact I");
}

TEST_CASE("blank_comments keeps layout") {
  std::string src = "a (* b\n c *) d \"(* not *)\"";
  auto out = blank_comments(src);
  CHECK(out.size() == src.size());
  CHECK(out == "a     \n      d \"(* not *)\"");
}

TEST_CASE("tokenize and tokens_equal") {
  auto t = tokenize("forall n : nat, Nat.add n 0 = n");
  REQUIRE(t.size() == 10);
  CHECK(t[4].text == ",");
  CHECK(t[5].text == "Nat.add");
  CHECK(t[5].kind == TokenKind::Identifier);
  CHECK(t[7].kind == TokenKind::Number);

  CHECK(tokens_equal("forall n,\n  n + 0 = n", "forall n, n+0=n"));
  CHECK_FALSE(tokens_equal("forall n, n + 0 = n", "forall n, n + 0 <= n"));
  CHECK_FALSE(tokens_equal("x y", "xy"));
  CHECK(tokens_equal("α → β", "α→β"));
}

TEST_CASE("mentions_admission looks at identifiers only") {
  CHECK(mentions_admission("Proof. Admitted."));
  CHECK(mentions_admission("Proof. intros. admit. Qed."));
  CHECK(mentions_admission("Admit Obligations."));
  CHECK(mentions_admission("Proof. give_up. Qed."));
  CHECK(mentions_admission("Proof. Abort."));
  CHECK(mentions_admission("Ltac cheat := Tactics.admit."));
  CHECK_FALSE(mentions_admission("(* Admitted *) Proof. auto. Qed."));
  CHECK_FALSE(mentions_admission("Definition s := \"admit\"."));
  CHECK_FALSE(mentions_admission("Lemma admitted_free : True. Proof. exact I. Qed."));
}

namespace {
Declaration decl(std::string_view src) {
  auto s = split_sentences(src);
  REQUIRE(s.size() == 1);
  auto d = classify(s[0]);
  REQUIRE(d.has_value());
  return *d;
}
}  // namespace

TEST_CASE("classify declarations") {
  auto th = decl("#[local] Theorem add_comm : forall a b, a + b = b + a.");
  CHECK(th.kind == DeclKind::Theorem);
  CHECK(th.names == std::vector<std::string>{"add_comm"});

  auto ind = decl("Inductive color := Red | Green | Blue.");
  CHECK(ind.kind == DeclKind::Inductive);
  CHECK(ind.names == std::vector<std::string>{"color", "Red", "Green", "Blue"});

  auto rec = decl("Record point := mk { px : nat; py : nat }.");
  CHECK(rec.names == std::vector<std::string>{"point", "mk", "px", "py"});

  auto mut = decl("Fixpoint even n := match n with O => true | S m => odd m end\nwith odd n : bool := false.");
  CHECK(mut.names == std::vector<std::string>{"even", "odd"});

  auto ax = decl("Axioms (a b : nat) (c : bool).");
  CHECK(ax.kind == DeclKind::Assumption);
  CHECK(ax.names == std::vector<std::string>{"a", "b", "c"});
  CHECK(decl("Parameter p q : Prop.").names == std::vector<std::string>{"p", "q"});

  auto nt = decl("Notation \"x == y\" := (x = y) (at level 70).");
  CHECK(nt.kind == DeclKind::Notation);
  CHECK(nt.names == std::vector<std::string>{"\"x == y\""});

  auto m = decl("Module Import M.");
  CHECK(m.kind == DeclKind::Module);
  CHECK(m.names == std::vector<std::string>{"M"});
  CHECK(m.opens_block);
  CHECK_FALSE(decl("Module N := Nat.").opens_block);
  CHECK(decl("Module Type T.").kind == DeclKind::ModuleType);
  CHECK(decl("Section S.").opens_block);
  CHECK(decl("End S.").kind == DeclKind::End);
  CHECK(decl("Local Open Scope Z_scope.").kind == DeclKind::Command);
  CHECK(decl("Tactic Notation \"t\" := idtac.").kind == DeclKind::Ltac);
}

TEST_CASE("marker harvesting") {
  CHECK_FALSE(harvest_after_marker("no marker here\n"));
  CHECK(harvest_after_marker("junk\nrocq_tools_output_marker: not found\nline1\nline2\n") == "line1\nline2\n");
  CHECK(harvest_after_marker("a rocq_tools_output_marker\nb rocq_tools_output_marker\nc") == "c");
  CHECK(harvest_after_marker("rocq_tools_output_marker") == "");
}

TEST_CASE("unterminated comments") {
  CHECK_FALSE(unterminated_comment("a (* b (* c *) d *) e"));
  CHECK_FALSE(unterminated_comment("\"(* in a string\""));
  CHECK_FALSE(unterminated_comment("(* \"*)\" still inside *)"));
  CHECK(unterminated_comment("ok.\n(* open (* nested *)") == 4);
  CHECK(unterminated_comment("(*") == 0);
}
