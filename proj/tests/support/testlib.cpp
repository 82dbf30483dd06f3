#include "testlib.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"
#include "rocq/interactive/session.hpp"
#include "rocq/vernac/marker.hpp"

namespace rocq::testing {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path data_dir() { return fs::path(ROCQ_TEST_DATA_DIR); }

std::string marker_output(std::string_view listing) {
  std::string out = "No object of basename " + std::string(vernac::kMarkerName) + "\n";
  out += listing;
  if (!out.empty() && out.back() != '\n') out += '\n';
  return out;
}

backend::RawCompileResult compiled(std::string_view stdout_text) {
  backend::RawCompileResult r;
  r.out = std::string(stdout_text);
  r.duration_ms = 40;
  return r;
}

backend::RawCompileResult compile_error(int line, int col_start, int col_end, std::string_view message) {
  backend::RawCompileResult r;
  r.exit_status = 1;
  r.err = "File \"./rocq_probe.v\", line " + std::to_string(line) + ", characters " + std::to_string(col_start) + "-" +
          std::to_string(col_end) + ":\nError: " + std::string(message) + "\n\n";
  r.duration_ms = 40;
  return r;
}

namespace {

json read_json(const fs::path& p) { return json::parse(text::read_file(p)); }

int line_of(std::string_view source, std::string_view needle) {
  auto lines = text::split_lines(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find(needle) != std::string_view::npos) return static_cast<int>(i) + 1;
  }
  raise(ErrorKind::InvalidArgument, "no line containing " + std::string(needle));
}

std::string_view nth_line(std::string_view source, int line) {
  return text::split_lines(source).at(static_cast<std::size_t>(line - 1));
}

}  // namespace

// ---------------------------------------------------------------- verify

std::vector<VerifyCase> load_verify_corpus(const fs::path& dir) {
  std::vector<VerifyCase> out;
  for (const auto& j : read_json(dir / "cases.json")) {
    VerifyCase c;
    c.name = j.at("name").get<std::string>();
    c.category = j.at("category").get<std::string>();
    c.candidate = text::read_file(dir / "candidates" / (c.name + ".v"));
    c.stub_file = j.at("stub").get<std::string>();
    c.stub = verify::CanonicalStub::from_source(text::read_file(dir / "stubs" / c.stub_file));
    c.accepted = j.at("accepted").get<bool>();
    c.violations = j.at("violations").get<std::vector<std::string>>();
    c.phase = j.at("phase").get<std::string>();
    c.axioms = j.at("axioms").get<std::vector<std::string>>();
    c.mock = j.at("mock");
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

backend::RawCompileResult scripted(const json& spec, std::string_view source, int candidate_offset) {
  if (spec.contains("assumptions")) return compiled(marker_output(spec["assumptions"].get<std::string>()));
  const std::string at = spec.at("error_at").get<std::string>();
  const std::string message = spec.at("message").get<std::string>();
  if (at == "wrapper") {
    const int line = line_of(source, "Proof. first [");
    auto text = nth_line(source, line);
    const int start = static_cast<int>(text.find("first"));
    const int end = static_cast<int>(text.find("].")) + 1;
    return compile_error(line, start, end, message);
  }
  auto chars = spec.at("chars");
  return compile_error(spec.at("line").get<int>() + candidate_offset - 1, chars[0].get<int>(), chars[1].get<int>(),
                       message);
}

}  // namespace

void script_verify_case(backend::MockScript& script, const VerifyCase& c) {
  if (c.mock.contains("sandbox")) {
    const auto sb = verify::build_sandbox(c.candidate, c.stub);
    script.add_compile(sb.source, scripted(c.mock["sandbox"], sb.source, sb.line_offset));
  }
  if (c.mock.contains("direct")) {
    const auto probe = verify::direct_probe(c.candidate, verify::discover_candidate_theorem(c.candidate, c.stub));
    script.add_compile(probe, scripted(c.mock["direct"], probe, 1));
  }
}

Outcome check_verdict(const VerifyCase& c, const verify::VerifyVerdict& v) {
  Outcome o;
  auto describe = [&] {
    std::string s = std::string(v.accepted ? "accepted" : "rejected") + " in " + std::string(to_string(v.phase));
    for (const auto& x : v.violations) s += "; " + std::string(to_string(x.kind)) + ": " + x.detail;
    return s;
  };
  if (v.accepted != c.accepted) o.fail("expected " + std::string(c.accepted ? "acceptance" : "rejection") + ", got " + describe());
  if (!c.phase.empty() && std::string(to_string(v.phase)) != c.phase) {
    o.fail("expected phase " + c.phase + ", got " + describe());
  }
  std::set<std::string> expected_kinds;
  for (const auto& spec : c.violations) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string needle = colon == std::string::npos ? "" : spec.substr(colon + 1);
    expected_kinds.insert(kind);
    const bool found = std::any_of(v.violations.begin(), v.violations.end(), [&](const verify::Violation& x) {
      return to_string(x.kind) == kind && x.detail.find(needle) != std::string::npos;
    });
    if (!found) o.fail("missing violation " + spec + ", got " + describe());
  }
  for (const auto& x : v.violations) {
    if (!expected_kinds.count(std::string(to_string(x.kind)))) {
      o.fail("unexpected violation kind " + std::string(to_string(x.kind)) + ", got " + describe());
    }
  }
  if (c.accepted) {
    std::set<std::string> want(c.axioms.begin(), c.axioms.end());
    if (want != v.axioms_used) {
      std::string got;
      for (const auto& a : v.axioms_used) got += " " + a;
      o.fail("axioms_used differ:" + got);
    }
  }
  return o;
}

std::vector<std::pair<std::string, Outcome>> run_verify_corpus(const std::vector<VerifyCase>& cases) {
  backend::MockScript script;
  for (const auto& c : cases) script_verify_case(script, c);
  backend::MockBackend mock(script);
  std::vector<std::pair<std::string, Outcome>> out;
  for (const auto& c : cases) {
    Outcome o;
    try {
      o = check_verdict(c, verify::verify(mock, c.candidate, c.stub, verify::AxiomWhitelist::defaults()));
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    out.emplace_back(c.name, o);
  }
  return out;
}

// ----------------------------------------------------------- diagnostics

std::vector<DiagnosticsCase> load_diagnostics_corpus(const fs::path& dir) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<DiagnosticsCase> out;
  for (const auto& d : dirs) {
    out.push_back(DiagnosticsCase{d.filename().string(), text::read_file(d / "source.v"),
                                  text::read_file(d / "output.txt"), read_json(d / "expected.json"),
                                  text::read_file(d / "report.txt")});
  }
  return out;
}

Outcome check_diagnostics_case(const DiagnosticsCase& c) {
  Outcome o;
  backend::RawCompileResult raw;
  raw.exit_status = c.expected.at("exit_status").get<int>();
  raw.err = c.output;
  const auto report = diagnostics::make_report(raw, c.source, c.expected.at("display").get<std::string>(),
                                               std::chrono::seconds(60));
  const auto want = c.expected.at("diagnostics").get<std::vector<diagnostics::Diagnostic>>();
  if (report.diagnostics.size() != want.size()) {
    o.fail("expected " + std::to_string(want.size()) + " diagnostics, got " + std::to_string(report.diagnostics.size()));
    return o;
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (!(report.diagnostics[i] == want[i])) {
      o.fail("diagnostic " + std::to_string(i) + " differs: got " + json(report.diagnostics[i]).dump() + " want " +
             json(want[i]).dump());
    }
  }
  const auto cats = c.expected.at("categories").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < cats.size() && i < report.categories.size(); ++i) {
    if (to_string(report.categories[i]) != cats[i]) {
      o.fail("category " + std::to_string(i) + ": got " + std::string(to_string(report.categories[i])) + " want " + cats[i]);
    }
  }
  if (report.success != c.expected.at("success").get<bool>()) o.fail("success flag differs");
  if (report.human_text != c.golden_report) o.fail("rendered report differs from golden:\n" + report.human_text);
  return o;
}

Outcome caret_property(int trials, std::uint64_t seed) {
  Outcome o;
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const std::string alphabet = "abcdefghij xyz()=+-:.;,_'\"0123456789";
  for (int t = 0; t < trials && o.pass; ++t) {
    std::vector<std::string> lines(static_cast<std::size_t>(pick(1, 8)));
    for (auto& l : lines) {
      const int len = pick(0, 3) == 0 ? 0 : pick(1, 70);
      for (int i = 0; i < len; ++i) l += alphabet[static_cast<std::size_t>(pick(0, static_cast<int>(alphabet.size()) - 1))];
    }
    std::string source;
    for (const auto& l : lines) source += l + "\n";

    diagnostics::Diagnostic d;
    d.file = "r.v";
    d.line = pick(1, static_cast<int>(lines.size()) + 2);
    const int len = d.line <= static_cast<int>(lines.size()) ? static_cast<int>(lines[static_cast<std::size_t>(d.line - 1)].size()) : 0;
    d.col_start = pick(0, len + 5);
    d.col_end = d.col_start + pick(0, 90);
    d.severity = pick(0, 1) ? diagnostics::Severity::Error : diagnostics::Severity::Warning;
    d.message = "message " + std::to_string(t);

    const std::string rendered = diagnostics::render_diagnostic(d, source);
    auto out = text::split_lines(rendered);
    const std::string ctx = " (trial " + std::to_string(t) + ", line " + std::to_string(d.line) + ", cols " +
                            std::to_string(d.col_start) + "-" + std::to_string(d.col_end) + ", len " +
                            std::to_string(len) + ")";
    const std::string header = "r.v:" + std::to_string(d.line) + ":" + std::to_string(d.col_start) + "-" +
                               std::to_string(d.col_end) + ": " + std::string(to_string(d.severity)) + ":";
    if (out.empty() || out[0] != header) {
      o.fail("bad header" + ctx);
      break;
    }
    const bool in_file = d.line <= static_cast<int>(lines.size());
    std::size_t next = 1;
    if (in_file) {
      if (out.size() < 2 || out[1] != lines[static_cast<std::size_t>(d.line - 1)]) {
        o.fail("excerpt is not the source line" + ctx);
        break;
      }
      next = 2;
      if (d.col_start <= len) {
        const std::string_view caret = out.size() > 2 ? out[2] : std::string_view();
        const auto first = caret.find('^');
        const auto last = caret.find_last_of('^');
        const auto want_count = static_cast<std::size_t>(std::max(1, std::min(d.col_end, len) - d.col_start));
        if (first != static_cast<std::size_t>(d.col_start) ||
            caret.substr(0, first).find_first_not_of(' ') != std::string_view::npos ||
            caret.substr(first).find_first_not_of('^') != std::string_view::npos ||
            last - first + 1 != want_count) {
          o.fail("caret line `" + std::string(caret) + "` is wrong" + ctx);
          break;
        }
        // Underline never runs past the line, except the single caret that
        // marks a position at the very end.
        if (last >= static_cast<std::size_t>(std::max(len, d.col_start + 1))) {
          o.fail("caret past end of line" + ctx);
          break;
        }
        next = 3;
      }
    }
    if (out.size() <= next || out[next] != d.message) {
      o.fail("message not where expected" + ctx);
      break;
    }
    if (!rendered.ends_with(d.message + "\n\n")) o.fail("block not terminated by a blank line" + ctx);
  }
  return o;
}

// ----------------------------------------------------------- interactive

namespace {

// Five states; tactics either move between them, fail with a message, or
// are unknown to the script.
backend::MockScript property_script() {
  backend::MockScript s;
  s.theorems["t"] = 0;
  s.states[0] = {backend::Goal{{}, "forall n m : nat, n + m = m + n"}};
  s.states[1] = {backend::Goal{{"n : nat", "m : nat"}, "n + m = m + n"}};
  s.states[2] = {backend::Goal{{"m : nat"}, "0 + m = m + 0"},
                 backend::Goal{{"n : nat", "m : nat", "IHn : n + m = m + n"}, "S n + m = m + S n"}};
  s.states[3] = {backend::Goal{{"n : nat", "m : nat", "IHn : n + m = m + n"}, "S n + m = m + S n"}};
  s.states[4] = {};
  auto step = [&](std::string from, const std::string& tac, int to) { s.step_table[{from, tac}] = backend::MockStep{to, {}, false}; };
  auto fail = [&](std::string from, const std::string& tac, const std::string& msg) {
    s.step_table[{from, tac}] = backend::MockStep{std::nullopt, msg, false};
  };
  step("0", "intros n m", 1);
  step("0", "intros", 1);
  step("0", "lia", 4);
  fail("0", "reflexivity", "In environment\nUnable to unify \"m + n\" with \"n + m\".");
  step("1", "lia", 4);
  step("1", "induction n", 2);
  step("1", "ring", 4);
  fail("1", "reflexivity", "Unable to unify \"m + n\" with \"n + m\".");
  fail("1", "intros", "No product even after head-reduction.");
  step("2", "simpl; lia", 3);
  step("2", "lia", 3);
  fail("2", "reflexivity", "Unable to unify \"m + 0\" with \"m\".");
  step("3", "lia", 4);
  fail("3", "exact IHn", "The term \"IHn\" has type \"n + m = m + n\" while it is expected to have type \"S n + m = m + S n\".");
  fail("*", "split", "Not an inductive goal with 1 constructor.");
  fail("*", "omega", "The reference omega was not found in the current environment.");
  return s;
}

const std::vector<std::string> kTacticPool = {"intros n m", "intros", "lia", "reflexivity", "induction n", "ring",
                                              "simpl; lia", "exact IHn", "split", "omega", "auto", "destruct m",
                                              "lia.", "  intros ", "idtac"};

}  // namespace

Outcome step_multi_property(int batches, std::uint64_t seed) {
  Outcome o;
  auto script = property_script();
  backend::MockBackend mock(script);
  interactive::SessionManager sessions(mock);
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  const auto tmp = fs::temp_directory_path() / ("rocq-step-multi-" + std::to_string(seed) + ".v");
  text::write_file(tmp, "Theorem t : forall n m : nat, n + m = m + n.\nAdmitted.\n");

  std::string id;
  for (int b = 0; b < batches && o.pass; ++b) {
    if (b % 10 == 0) {
      if (!id.empty()) sessions.close_session(id);
      id = sessions.start_session(tmp, "t").first.session_id;
    }
    // Wander a little so batches start from different states.
    for (std::size_t k = pick(3); k > 0; --k) sessions.step(id, kTacticPool[pick(kTacticPool.size())]);

    const std::string before = backend::serialize(sessions.current_goals(id));
    std::vector<std::string> batch(1 + pick(interactive::kMaxMultiTactics));
    for (auto& t : batch) t = kTacticPool[pick(kTacticPool.size())];

    std::vector<interactive::StepResult> results;
    try {
      results = sessions.step_multi(id, batch);
    } catch (const std::exception& e) {
      o.fail("batch " + std::to_string(b) + " threw: " + e.what());
      break;
    }
    const std::string after = backend::serialize(sessions.current_goals(id));
    if (before != after) {
      o.fail("batch " + std::to_string(b) + " moved the session:\n" + before + "\n--\n" + after);
      break;
    }
    if (results.size() != batch.size()) o.fail("batch " + std::to_string(b) + ": result count differs");
    // Each result must be what the script says a lone step from the
    // pre-call state does.
    const std::string from = sessions.current_goals(id).state_token.substr(1);
    for (std::size_t i = 0; i < results.size() && o.pass; ++i) {
      const auto& r = results[i];
      const auto key = backend::MockScript::tactic_key(batch[i]);
      auto it = script.step_table.find({from, key});
      if (it == script.step_table.end()) it = script.step_table.find({"*", key});
      const bool ok = it != script.step_table.end() && it->second.next.has_value();
      if (r.tactic != batch[i]) o.fail("result order differs from the batch");
      if ((r.outcome != interactive::StepOutcome::Failed) != ok) {
        o.fail("batch " + std::to_string(b) + ": `" + batch[i] + "` from state " + from + " has the wrong outcome");
      } else if (ok && (!r.goals_after || r.goals_after->state_token != "m" + std::to_string(*it->second.next))) {
        o.fail("batch " + std::to_string(b) + ": `" + batch[i] + "` reached the wrong state");
      } else if (!ok && r.goals_after) {
        o.fail("failed step carries goals");
      }
      if (r.outcome == interactive::StepOutcome::Solved && !r.goals_after->goals.empty()) o.fail("Solved with goals left");
    }
  }
  if (!id.empty()) sessions.close_session(id);
  fs::remove(tmp);
  return o;
}

Outcome step_multi_limit() {
  Outcome o;
  auto script = property_script();
  backend::MockBackend mock(script);
  interactive::SessionManager sessions(mock);
  const auto tmp = fs::temp_directory_path() / "rocq-step-multi-limit.v";
  text::write_file(tmp, "Theorem t : forall n m : nat, n + m = m + n.\nAdmitted.\n");
  const auto id = sessions.start_session(tmp, "t").first.session_id;
  const std::string before = backend::serialize(sessions.current_goals(id));

  try {
    sessions.step_multi(id, std::vector<std::string>(interactive::kMaxMultiTactics + 1, "lia"));
    o.fail("21 tactics were accepted");
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TooManyTactics) o.fail("21 tactics: wrong error " + std::string(to_string(e.kind())));
  }
  try {
    auto r = sessions.step_multi(id, std::vector<std::string>(interactive::kMaxMultiTactics, "lia"));
    if (r.size() != interactive::kMaxMultiTactics) o.fail("20 tactics: wrong result count");
  } catch (const std::exception& e) {
    o.fail(std::string("20 tactics threw: ") + e.what());
  }
  if (backend::serialize(sessions.current_goals(id)) != before) o.fail("limit checks moved the session");
  sessions.close_session(id);
  fs::remove(tmp);
  return o;
}

// -------------------------------------------------------------- protocol

server::Resources transcript_resources(const fs::path& data) {
  backend::MockScript s;
  const fs::path files = data / "files";
  const std::string plus = text::read_file(files / "plus.v");

  // rocq_compile
  s.add_compile("Lemma one : 1 = 1.\nProof. reflexivity. Qed.\n", compiled());
  s.add_compile("Lemma two : 1 = 2.\nProof. reflexivity. Qed.\n",
                compile_error(2, 7, 18, "Unable to unify \"2\" with \"1\"."));
  {
    backend::RawCompileResult slow;
    slow.exit_status = -1;
    slow.timed_out = true;
    slow.duration_ms = 5000;
    s.add_compile("Lemma slow : 2 ^ 100 = 2 ^ 100.\nProof. vm_compute. Qed.\n", slow);
  }
  s.add_compile(plus, compiled());

  // rocq_verify
  const auto stub = verify::CanonicalStub::from_source(text::read_file(files / "stub.v"));
  const std::string good = text::read_file(files / "candidate_good.v");
  const std::string bad = text::read_file(files / "candidate_admitted.v");
  s.add_compile(verify::build_sandbox(good, stub).source, compiled(marker_output("Closed under the global context")));
  s.add_compile(verify::build_sandbox(bad, stub).source,
                compiled(marker_output("Axioms:\nCandidate.plus_n_O' : forall n : nat, n = n + 0")));

  // rocq_auto_solve: the first battery entry closes two_plus_two; nothing closes the hard stub.
  const auto& battery = automation::TacticBattery::defaults();
  const auto easy = verify::CanonicalStub::from_source("Theorem two_plus_two : 2 + 2 = 4.\nAdmitted.\n");
  s.add_compile(automation::attempt_source(easy, battery, battery.entries.front().tactic), compiled());
  const auto hard = verify::CanonicalStub::from_source("Theorem succ_neq : forall n : nat, n <> S n -> False.\nAdmitted.\n");
  for (const auto& e : battery.entries) {
    const auto src = automation::attempt_source(hard, battery, e.tactic);
    const int line = line_of(src, "Proof.");
    s.add_compile(src, compile_error(line, 7, 7 + static_cast<int>(e.tactic.size()),
                                     "Tactic failure: " + e.tactic + " cannot close the goal."));
  }

  // rocq_query and rocq_notations without a session: probe files.
  auto probe = [&](const std::string& context, const std::string& command) {
    std::string p = context;
    if (!p.empty() && p.back() != '\n') p += '\n';
    return p + std::string(vernac::kMarkerSentence) + "\n" + command + "\n";
  };
  s.add_compile(probe(plus, "Check plus_n_O."), compiled(marker_output("plus_n_O\n     : forall n : nat, n = n + 0")));
  s.add_compile(probe("", "About Nat.add."),
                compiled(marker_output("Nat.add : nat -> nat -> nat\n\nNat.add is not universe polymorphic\n"
                                       "Arguments Nat.add (n m)%nat_scope\nNat.add is transparent\n"
                                       "Expands to: Constant Coq.Init.Nat.add")));
  s.add_compile(probe("", "Print no_such_thing."),
                compile_error(2, 6, 19, "no_such_thing not a defined object."));
  s.add_compile(probe(plus, "Locate \"+\"."),
                compiled(marker_output("Notation \"x + y\" := (sum x y) : type_scope\n"
                                       "Notation \"x + y\" := (Nat.add x y) : nat_scope (default interpretation)")));
  s.add_compile(probe("", "Locate \"+++\"."), compiled(marker_output("Unknown notation")));

  // Interactive engine for plus_n_O'.
  s.theorems["plus_n_O'"] = 0;
  s.states[0] = {backend::Goal{{}, "forall n : nat, n = n + 0"}};
  s.states[1] = {backend::Goal{{"n : nat"}, "n = n + 0"}};
  s.states[2] = {backend::Goal{{}, "0 = 0 + 0"}, backend::Goal{{"n : nat", "IHn : n = n + 0"}, "S n = S n + 0"}};
  s.states[3] = {};
  s.step_table[{"0", "intros n"}] = backend::MockStep{1, {}, false};
  s.step_table[{"1", "induction n"}] = backend::MockStep{2, {}, false};
  s.step_table[{"1", "lia"}] = backend::MockStep{3, {}, false};
  s.step_table[{"1", "reflexivity"}] =
      backend::MockStep{std::nullopt, "In environment\nn : nat\nUnable to unify \"n + 0\" with \"n\".", false};
  s.commands[backend::MockScript::tactic_key("Check plus_n_O.")] = backend::MockCommand{"plus_n_O\n     : forall n : nat, n = n + 0", {}};

  server::Resources r;
  r.backend = std::make_unique<backend::MockBackend>(std::move(s));
  r.whitelist = verify::AxiomWhitelist::defaults();
  r.battery = battery;
  r.rules = diagnostics::CategoryRules::defaults();
  return r;
}

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

std::vector<Transcript> load_transcripts(const fs::path& dir, const fs::path& data) {
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".txt") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Transcript> out;
  for (const auto& p : paths) {
    Transcript t{p.stem().string(), {}};
    const std::string content = text::read_file(p);
    for (auto line : text::split_lines(content)) {
      std::string l = replace_all(std::string(line), "@DATA@", data.string());
      if (l.starts_with("> ")) {
        t.exchanges.push_back(Exchange{l.substr(2), std::nullopt});
      } else if (l.starts_with("< ") && !t.exchanges.empty()) {
        t.exchanges.back().response = l.substr(2);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string render_transcript(const Transcript& t, const fs::path& data) {
  std::string out;
  for (const auto& e : t.exchanges) {
    out += "> " + replace_all(e.request, data.string(), "@DATA@") + "\n";
    if (e.response) out += "< " + replace_all(*e.response, data.string(), "@DATA@") + "\n";
  }
  return out;
}

Transcript record(const Transcript& requests_only, const fs::path& data) {
  auto res = transcript_resources(data);
  server::ToolServer srv(res);
  Transcript t{requests_only.name, {}};
  for (const auto& e : requests_only.exchanges) t.exchanges.push_back(Exchange{e.request, srv.handle_message(e.request)});
  return t;
}

Outcome replay(const Transcript& t, const fs::path& data) {
  Outcome o;
  auto res = transcript_resources(data);
  server::ToolServer srv(res);
  for (std::size_t i = 0; i < t.exchanges.size(); ++i) {
    const auto& e = t.exchanges[i];
    auto got = srv.handle_message(e.request);
    if (got != e.response) {
      o.fail(t.name + " exchange " + std::to_string(i + 1) + ":\n  request  " + e.request + "\n  expected " +
             e.response.value_or("(no response)") + "\n  got      " + got.value_or("(no response)"));
    }
  }
  return o;
}

Outcome tools_list_has_eight(const fs::path& data) {
  Outcome o;
  auto res = transcript_resources(data);
  server::ToolServer srv(res);
  auto reply = json::parse(*srv.handle_message(R"({"jsonrpc":"2.0","id":1,"method":"tools/list"})"));
  const auto& tools = reply["result"]["tools"];
  const std::set<std::string> want = {"rocq_compile", "rocq_verify",     "rocq_auto_solve", "rocq_query",
                                      "rocq_step",    "rocq_step_multi", "rocq_toc",        "rocq_notations"};
  std::set<std::string> got;
  for (const auto& t : tools) {
    got.insert(t.at("name").get<std::string>());
    if (!t.contains("inputSchema") || !t["inputSchema"].is_object() || t["inputSchema"]["type"] != "object") {
      o.fail("descriptor without an object inputSchema: " + t.dump());
    }
    if (!t.contains("description") || t["description"].get<std::string>().empty()) o.fail("descriptor without description");
  }
  if (tools.size() != 8) o.fail("tools/list returned " + std::to_string(tools.size()) + " descriptors");
  if (got != want) o.fail("tool names differ from the expected eight");
  return o;
}

Outcome bijection_property(int batches, int batch_size, std::size_t concurrency, std::uint64_t seed,
                           const fs::path& data) {
  Outcome o;
  auto res = transcript_resources(data);
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  const std::string plus = (data / "files" / "plus.v").string();
  const std::vector<std::string> calls = {
      R"({"method":"ping"})",
      R"({"method":"tools/list"})",
      R"({"method":"tools/call","params":{"name":"rocq_toc","arguments":{"path":")" + plus + R"("}}})",
      R"({"method":"tools/call","params":{"name":"rocq_compile","arguments":{"source":"Lemma one : 1 = 1.\nProof. reflexivity. Qed.\n"}}})",
      R"({"method":"tools/call","params":{"name":"rocq_compile","arguments":{"source":"Lemma two : 1 = 2.\nProof. reflexivity. Qed.\n"}}})",
      R"({"method":"tools/call","params":{"name":"rocq_query","arguments":{"kind":"About","argument":"Nat.add"}}})",
      R"({"method":"tools/call","params":{"name":"rocq_notations","arguments":{"token":"+++"}}})",
      R"({"method":"tools/call","params":{"name":"rocq_nope","arguments":{}}})",
      R"({"method":"tools/call","params":{"name":"rocq_toc","arguments":{}}})",
      R"({"method":"tools/call","params":{"name":"rocq_step_multi","arguments":{"session_id":"s9","tactics":["lia"]}}})",
      R"({"method":"no/such/method"})",
  };

  for (int b = 0; b < batches && o.pass; ++b) {
    std::string input;
    std::map<std::string, int> expected;  // id (dumped) -> count
    int anonymous = 0;                    // malformed lines answered with id null
    for (int i = 0; i < batch_size; ++i) {
      const int roll = pick(20);
      if (roll == 0) {
        input += "{not json\n";
        ++anonymous;
        continue;
      }
      if (roll == 1) {
        input += R"({"jsonrpc":"2.0","method":"notifications/initialized"})" "\n";
        continue;
      }
      json req = json::parse(calls[static_cast<std::size_t>(pick(static_cast<int>(calls.size())))]);
      req["jsonrpc"] = "2.0";
      json id = pick(2) ? json("r" + std::to_string(b) + "-" + std::to_string(i)) : json(b * 1000 + i);
      req["id"] = id;
      ++expected[id.dump()];
      input += req.dump() + "\n";
    }

    server::ToolServer srv(res);
    std::istringstream in(input);
    std::ostringstream out;
    srv.serve(in, out, framing::Framing::Lines, concurrency);

    std::map<std::string, int> seen;
    int null_ids = 0;
    const std::string replies = out.str();
    for (auto line : text::split_lines(replies)) {
      if (text::trim(line).empty()) continue;
      json r = json::parse(line, nullptr, false);
      if (r.is_discarded() || !r.is_object() || r.value("jsonrpc", "") != "2.0") {
        o.fail("batch " + std::to_string(b) + ": not a JSON-RPC response: " + std::string(line));
        break;
      }
      if (r["id"].is_null()) ++null_ids;
      else ++seen[r["id"].dump()];
      if (r.contains("result") == r.contains("error")) o.fail("response must carry exactly one of result/error");
    }
    if (seen != expected) o.fail("batch " + std::to_string(b) + ": responses are not one per request id");
    if (null_ids != anonymous) o.fail("batch " + std::to_string(b) + ": parse errors not answered one to one");
  }
  return o;
}

// ------------------------------------------------------------ automation

std::vector<AutoCase> load_auto_corpus(const fs::path& dir) {
  std::vector<AutoCase> out;
  for (const auto& j : read_json(dir / "cases.json")) {
    AutoCase c;
    c.stub_file = j.at("stub").get<std::string>();
    c.stub = verify::CanonicalStub::from_source(text::read_file(dir / "stubs" / c.stub_file));
    if (!j.at("winner").is_null()) c.winner = j["winner"].get<std::string>();
    c.also = j.value("also", std::vector<std::string>{});
    c.timeouts = j.value("timeouts", std::vector<std::string>{});
    c.uses_real_axioms = j.value("axioms", false);
    c.hard = j.value("hard", false);
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

std::string failure_message(const std::string& tactic, const std::string& theorem) {
  if (tactic.find("lia") != std::string::npos || tactic.find("lra") != std::string::npos) {
    return "Tactic failure:  Cannot find witness.";
  }
  if (tactic.find("ring") != std::string::npos) return "Tactic failure: ring failed.";
  if (tactic.find("field") != std::string::npos) return "Tactic failure: field failed.";
  if (tactic == "reflexivity") return "The relation under the goal is not a reflexive relation.";
  if (tactic == "easy") return "Tactic failure: Cannot solve this goal.";
  return "(in proof " + theorem + "): Attempt to save an incomplete proof\n(there are remaining open goals).";
}

}  // namespace

void script_auto_case(backend::MockScript& script, const AutoCase& c, const automation::TacticBattery& battery) {
  auto in = [](const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); };
  for (const auto& e : battery.entries) {
    const auto src = automation::attempt_source(c.stub, battery, e.tactic);
    if ((c.winner && e.tactic == *c.winner) || in(c.also, e.tactic)) {
      script.add_compile(src, compiled());
    } else if (in(c.timeouts, e.tactic)) {
      backend::RawCompileResult r;
      r.exit_status = -1;
      r.timed_out = true;
      r.duration_ms = e.timeout.count() * 1000;
      script.add_compile(src, r);
    } else {
      const std::string needle = "Proof. " + e.tactic + ". Qed.";
      const int line = line_of(src, needle);
      script.add_compile(src, compile_error(line, 7, 7 + static_cast<int>(e.tactic.size()),
                                            failure_message(e.tactic, c.stub.theorem_name)));
    }
  }
  if (c.winner) {
    const auto won = automation::attempt_source(c.stub, battery, *c.winner);
    const std::string listing = c.uses_real_axioms
                                    ? "Axioms:\nClassicalDedekindReals.sig_not_dec : forall P : Prop, {~ ~ P} + {~ P}\n"
                                      "ClassicalDedekindReals.sig_forall_dec\n"
                                      "  : forall P : nat -> Prop, {n : nat | ~ P n} + {forall n : nat, P n}\n"
                                      "FunctionalExtensionality.functional_extensionality_dep\n"
                                      "  : forall (A : Type) (B : A -> Type) (f g : forall x : A, B x),\n"
                                      "    (forall x : A, f x = g x) -> f = g"
                                    : "Closed under the global context";
    script.add_compile(verify::build_sandbox(won, c.stub).source, compiled(marker_output(listing)));
  }
}

Outcome check_auto_case(const backend::ProverBackend& backend, const AutoCase& c, const automation::TacticBattery& battery) {
  Outcome o;
  const auto r = automation::auto_solve(backend, c.stub, battery);
  const auto& entries = battery.entries;
  for (std::size_t i = 0; i < r.attempts.size(); ++i) {
    if (i >= entries.size() || r.attempts[i].tactic != entries[i].tactic) o.fail("attempts out of battery order");
  }
  if (!c.winner) {
    if (r.solved) o.fail("hard stub reported solved by " + r.winning_tactic.value_or("?"));
    if (r.attempts.size() != entries.size()) {
      o.fail("expected all " + std::to_string(entries.size()) + " attempts, got " + std::to_string(r.attempts.size()));
    }
    for (const auto& a : r.attempts) {
      const bool timeout = std::find(c.timeouts.begin(), c.timeouts.end(), a.tactic) != c.timeouts.end();
      const auto want = timeout ? automation::AttemptOutcome::TimedOut : automation::AttemptOutcome::Failed;
      if (a.outcome != want) o.fail(a.tactic + ": outcome " + std::string(to_string(a.outcome)));
      if (a.message.empty()) o.fail(a.tactic + ": failed attempt without a message");
    }
    return o;
  }

  std::size_t win = 0;
  while (win < entries.size() && entries[win].tactic != *c.winner) ++win;
  if (!r.solved || r.winning_tactic != c.winner) {
    o.fail("expected a win by " + *c.winner + ", got " + r.winning_tactic.value_or("none"));
    return o;
  }
  if (r.attempts.size() != win + 1) o.fail("not truncated at the first win: " + std::to_string(r.attempts.size()) + " attempts");
  for (std::size_t i = 0; i + 1 < r.attempts.size(); ++i) {
    if (r.attempts[i].outcome == automation::AttemptOutcome::Solved) o.fail("a Solved attempt before the winner");
  }
  if (r.attempts.back().outcome != automation::AttemptOutcome::Solved) o.fail("last attempt is not the win");
  if (!r.winning_source || *r.winning_source != automation::attempt_source(c.stub, battery, *c.winner)) {
    o.fail("winning_source is not the compiled attempt");
    return o;
  }
  // Replay: the winning file must pass the verifier against the same stub.
  auto v = verify::verify(backend, *r.winning_source, c.stub, verify::AxiomWhitelist::defaults());
  if (!v.accepted) {
    std::string why;
    for (const auto& x : v.violations) why += " " + std::string(to_string(x.kind)) + ": " + x.detail;
    o.fail("winning proof rejected on replay:" + why);
  }
  return o;
}

std::vector<std::pair<std::string, Outcome>> run_auto_corpus(const std::vector<AutoCase>& cases) {
  const auto& battery = automation::TacticBattery::defaults();
  backend::MockScript script;
  for (const auto& c : cases) script_auto_case(script, c, battery);
  backend::MockBackend mock(script);
  std::vector<std::pair<std::string, Outcome>> out;
  for (const auto& c : cases) {
    Outcome o;
    try {
      o = check_auto_case(mock, c, battery);
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    out.emplace_back(c.stub_file, o);
  }
  return out;
}

}  // namespace rocq::testing
