#include <doctest.h>

#include <unistd.h>

#include "rocq/backend/mock.hpp"
#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"
#include "rocq/interactive/session.hpp"
#include "testlib.hpp"

using namespace rocq;
using namespace rocq::interactive;

namespace {

std::optional<ErrorKind> kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

backend::MockScript plus_script() {
  return backend::MockScript::from_json(nlohmann::json::parse(R"js({
    "engine": {
      "theorems": {"plus_n_O'": 0, "double_zero": 5},
      "states": {"0": [{"conclusion": "forall n : nat, n = n + 0"}],
                 "1": [{"hypotheses": ["n : nat"], "conclusion": "n = n + 0"}],
                 "2": [],
                 "5": [{"conclusion": "Plus.double 0 = 0"}]},
      "steps": [{"state": 0, "tactic": "intros n", "next": 1},
                {"state": 1, "tactic": "lia", "next": 2},
                {"state": 0, "tactic": "intros; lia", "next": 2},
                {"state": 0, "tactic": "reflexivity", "error": "In environment\nUnable to unify \"n + 0\" with \"n\"."},
                {"state": "*", "tactic": "crash_now", "crash": true}],
      "commands": [{"text": "Check plus_n_O.", "output": "plus_n_O\n     : forall n : nat, n = n + 0"},
                   {"text": "Print nope.", "error": "nope not a defined object."},
                   {"text": "Locate \"+\".", "output": "Notation \"x + y\" := (Nat.add x y) : nat_scope\n  (default interpretation)"}]
    }
  })js"));
}

const auto kPlus = [] { return testing::data_dir() / "transcripts/files/plus.v"; };

}  // namespace

TEST_CASE("step_multi leaves the session where it was") {
  auto o = testing::step_multi_property(200, 3);
  CHECK_MESSAGE(o.pass, o.detail);
}

TEST_CASE("step_multi batch limit") {
  auto o = testing::step_multi_limit();
  CHECK_MESSAGE(o.pass, o.detail);
}

TEST_CASE("sessions: start, step, close") {
  backend::MockBackend b(plus_script());
  SessionManager m(b);
  auto [h, g0] = m.start_session(kPlus(), "plus_n_O'");
  CHECK(h.session_id == "s1");
  CHECK(h.alive);
  CHECK(g0.goals.size() == 1);

  auto bad = m.step(h.session_id, "reflexivity");
  CHECK(bad.outcome == StepOutcome::Failed);
  CHECK_FALSE(bad.goals_after);
  CHECK(bad.message.find("Unable to unify") != std::string::npos);
  CHECK(m.current_goals(h.session_id) == g0);

  auto r1 = m.step(h.session_id, "intros n");
  CHECK(r1.outcome == StepOutcome::Advanced);
  CHECK(r1.goals_after->goals.at(0).hypotheses == std::vector<std::string>{"n : nat"});
  auto r2 = m.step(h.session_id, "lia.");
  CHECK(r2.outcome == StepOutcome::Solved);
  CHECK(m.current_goals(h.session_id).goals.empty());

  auto [h2, g2] = m.start_session(kPlus(), "double_zero");
  CHECK(h2.session_id == "s2");
  CHECK(m.live_sessions() == 2);
  m.close_session(h.session_id);
  m.close_session(h.session_id);
  m.close_session("s99");
  CHECK(m.live_sessions() == 1);
  CHECK(kind_of([&] { m.step(h.session_id, "lia"); }) == ErrorKind::SessionClosed);
  CHECK(kind_of([&] { m.step("s42", "lia"); }) == ErrorKind::SessionClosed);
  CHECK_FALSE(m.handle(h.session_id).alive);
}

TEST_CASE("sessions: start failures") {
  backend::MockBackend b(plus_script());
  SessionManager m(b);
  CHECK(kind_of([&] { m.start_session(testing::data_dir() / "nope.v", "x"); }) == ErrorKind::FileNotFound);
  CHECK(kind_of([&] { m.start_session(kPlus(), "absent"); }) == ErrorKind::TheoremNotFound);

  backend::MockScript no_engine;
  no_engine.caps = {true, false};
  backend::MockBackend nb(no_engine);
  SessionManager nm(nb);
  CHECK(kind_of([&] { nm.start_session(kPlus(), "plus_n_O'"); }) == ErrorKind::BackendUnavailable);
}

TEST_CASE("sessions: an engine crash kills only that session") {
  backend::MockBackend b(plus_script());
  SessionManager m(b);
  auto a = m.start_session(kPlus(), "plus_n_O'").first;
  auto c = m.start_session(kPlus(), "plus_n_O'").first;
  CHECK(kind_of([&] { m.step_multi(a.session_id, {"intros n", "crash_now"}); }) == ErrorKind::EngineCrash);
  CHECK_FALSE(m.handle(a.session_id).alive);
  CHECK(kind_of([&] { m.current_goals(a.session_id); }) == ErrorKind::SessionClosed);
  CHECK(m.step(c.session_id, "intros; lia").outcome == StepOutcome::Solved);
}

TEST_CASE("step_multi results") {
  backend::MockBackend b(plus_script());
  SessionManager m(b);
  auto h = m.start_session(kPlus(), "plus_n_O'").first;
  auto rs = m.step_multi(h.session_id, {"intros n", "reflexivity", "intros; lia", "auto"});
  REQUIRE(rs.size() == 4);
  CHECK(rs[0].outcome == StepOutcome::Advanced);
  CHECK(rs[1].outcome == StepOutcome::Failed);
  CHECK(rs[2].outcome == StepOutcome::Solved);
  CHECK(rs[3].outcome == StepOutcome::Failed);
  CHECK(rs[3].message.starts_with("unscripted"));
  CHECK(kind_of([&] { m.step_multi(h.session_id, {}); }) == ErrorKind::InvalidArgument);

  auto j = nlohmann::json(rs[1]);
  CHECK(j["outcome"] == "Failed");
  CHECK(j["goals_after"].is_null());
}

TEST_CASE("queries inside a session") {
  backend::MockBackend b(plus_script());
  SessionManager m(b);
  auto h = m.start_session(kPlus(), "plus_n_O'").first;
  CHECK(m.query(QueryKind::Check, "plus_n_O", h.session_id) == "plus_n_O\n     : forall n : nat, n = n + 0");
  CHECK(kind_of([&] { m.query(QueryKind::Print, "nope", h.session_id); }) == ErrorKind::QueryFailed);
  CHECK(kind_of([&] { m.query(QueryKind::Check, "  ", h.session_id); }) == ErrorKind::InvalidArgument);
  auto n = m.resolve_notation("+", h.session_id);
  REQUIRE(n.size() == 1);
  CHECK(n[0].interpretation == "Nat.add x y");
  CHECK(n[0].is_default);
}

TEST_CASE("queries through a probe file") {
  backend::MockScript s;
  s.add_compile("Locate rocq_tools_output_marker.\nAbout Nat.add.\n",
                testing::compiled(testing::marker_output("Nat.add : nat -> nat -> nat\n\nNat.add is transparent\n\n")));
  s.add_compile("Locate rocq_tools_output_marker.\nPrint nope.\n",
                testing::compile_error(2, 6, 10, "nope not a defined object."));
  s.add_compile("Lemma a : True.\nLocate rocq_tools_output_marker.\nCheck a.\n",
                testing::compile_error(1, 0, 5, "Syntax error: something."));
  backend::MockBackend b(s);
  SessionManager m(b);
  CHECK(m.query(QueryKind::About, "Nat.add") == "Nat.add : nat -> nat -> nat\n\nNat.add is transparent");
  try {
    m.query(QueryKind::Print, "nope");
    FAIL("expected QueryFailed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::QueryFailed);
    CHECK(std::string(e.what()) == "nope not a defined object.");
  }

  const auto ctx = std::filesystem::temp_directory_path() / ("rocq_ctx_" + std::to_string(::getpid()) + ".v");
  text::write_file(ctx, "Lemma a : True.");
  try {
    m.query(QueryKind::Check, "a", std::nullopt, ctx);
    FAIL("expected QueryFailed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::QueryFailed);
    CHECK(std::string(e.what()) == "context file does not compile: Syntax error: something.");
  }
  std::filesystem::remove(ctx);
}

TEST_CASE("query kinds") {
  CHECK(parse_query_kind("Search") == QueryKind::Search);
  CHECK(parse_query_kind("About") == QueryKind::About);
  CHECK(kind_of([] { parse_query_kind("Compute"); }) == ErrorKind::InvalidQueryKind);
  CHECK(kind_of([] { parse_query_kind("check"); }) == ErrorKind::InvalidQueryKind);
}

TEST_CASE("Locate output parsing") {
  auto e = parse_locate_notation(
      "Notation \"x + y\" := (Nat.add x y) : nat_scope (default interpretation)\n"
      "Notation \"x + y\" := (Z.add x y) : Z_scope\n"
      "Notation \"{ x } + { y }\" := (sumbool x y) : type_scope\n"
      "Notation \"x + y\" := (sum x y)\n"
      "  : type_scope\n");
  REQUIRE(e.size() == 4);
  CHECK(e[0].is_default);
  CHECK(e[0].scope == "nat_scope");
  CHECK(e[1].interpretation == "Z.add x y");
  CHECK_FALSE(e[1].is_default);
  CHECK(e[2].notation == "\"{ x } + { y }\"");
  CHECK(e[3].scope == "type_scope");
  CHECK(kind_of([] { parse_locate_notation("Unknown notation"); }) == ErrorKind::NotationUnknown);
  CHECK(kind_of([] { parse_locate_notation("garbage"); }) == ErrorKind::NotationUnknown);
}

TEST_CASE("table of contents") {
  auto t = toc(kPlus());
  std::vector<TocEntry> expect{
      {TocKind::Module, "Plus", 3, 0},       {TocKind::Definition, "double", 4, 1},
      {TocKind::Section, "Props", 6, 1},     {TocKind::Lemma, "double_zero", 7, 2},
      {TocKind::Theorem, "plus_n_O'", 12, 0},
  };
  CHECK(t == expect);
  CHECK(kind_of([] { toc("/nonexistent/file.v"); }) == ErrorKind::FileNotFound);
  // Broken files still get an outline.
  auto broken = toc_of_source("Lemma a : (.\nDefinition b := .\nEnd.");
  REQUIRE(broken.size() == 2);
  CHECK(broken[1].name == "b");
}
