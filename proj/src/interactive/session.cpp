#include "rocq/interactive/session.hpp"

#include <algorithm>
#include <regex>

#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"
#include "rocq/diagnostics/report.hpp"
#include "rocq/verify/stub.hpp"
#include "rocq/vernac/lexer.hpp"
#include "rocq/vernac/marker.hpp"

namespace rocq::interactive {

struct SessionManager::Session {
  std::mutex mu;
  SessionHandle handle;
  std::unique_ptr<backend::ProofEngine> engine;
  std::string state;
};

namespace {

constexpr std::pair<QueryKind, std::string_view> kQueryKinds[] = {
    {QueryKind::Search, "Search"}, {QueryKind::Check, "Check"}, {QueryKind::Print, "Print"}, {QueryKind::About, "About"}};

std::string as_sentence(std::string_view text) {
  std::string s(text::trim(text));
  if (s.empty() || s.back() == '.') return s;
  if (s.find_first_not_of(s.front()) == std::string::npos && std::string_view("-+*{}").find(s.front()) != std::string_view::npos) {
    return s;  // bullets and braces are sentences of their own
  }
  s += '.';
  return s;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

// Strips one pair of parentheses enclosing the whole text.
std::string unwrap(std::string_view s) {
  s = text::trim(s);
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') return std::string(s);
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    else if (s[i] == ')' && --depth == 0 && i + 1 != s.size()) return std::string(s);
  }
  return std::string(text::trim(s.substr(1, s.size() - 2)));
}

}  // namespace

std::string_view to_string(StepOutcome o) {
  switch (o) {
    case StepOutcome::Advanced: return "Advanced";
    case StepOutcome::Solved: return "Solved";
    case StepOutcome::Failed: return "Failed";
  }
  return "Failed";
}

std::string_view to_string(QueryKind k) {
  for (const auto& [kind, name] : kQueryKinds) {
    if (kind == k) return name;
  }
  return "Check";
}

QueryKind parse_query_kind(std::string_view name) {
  for (const auto& [kind, n] : kQueryKinds) {
    if (n == name) return kind;
  }
  raise(ErrorKind::InvalidQueryKind, "unsupported query kind: " + std::string(name));
}

std::vector<NotationEntry> parse_locate_notation(std::string_view output) {
  if (output.find("Unknown notation") != std::string_view::npos) {
    raise(ErrorKind::NotationUnknown, "unknown notation");
  }
  // Long entries wrap onto indented continuation lines.
  std::vector<std::string> logical;
  for (auto line : text::split_lines(output)) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    if ((line.front() == ' ' || line.front() == '\t') && !logical.empty()) {
      logical.back() += " " + std::string(text::trim(line));
    } else {
      logical.emplace_back(text::trim(line));
    }
  }
  static const std::regex entry(
      R"re(^Notation\s+("(?:[^"]|"")*")\s*:=\s*(.*?)(?:\s+:\s+([A-Za-z_][A-Za-z0-9_']*))?(\s+\(default interpretation\))?$)re");
  std::vector<NotationEntry> out;
  for (const auto& line : logical) {
    std::smatch m;
    if (!std::regex_match(line, m, entry)) continue;
    out.push_back(NotationEntry{m.str(1), unwrap(m.str(2)), m.str(3), m[4].matched});
  }
  if (out.empty()) raise(ErrorKind::NotationUnknown, "no notation entries in: " + first_line(std::string(output)));
  return out;
}

SessionManager::SessionManager(const backend::ProverBackend& backend) : backend_(backend) {}

SessionManager::~SessionManager() {
  std::lock_guard lock(mu_);
  for (auto& [id, s] : sessions_) {
    std::lock_guard slock(s->mu);
    s->engine.reset();
  }
}

std::shared_ptr<SessionManager::Session> SessionManager::find(std::string_view session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) raise(ErrorKind::SessionClosed, "no such session: " + std::string(session_id));
  return it->second;
}

std::pair<SessionHandle, GoalState> SessionManager::start_session(const std::filesystem::path& source_path,
                                                                  std::string_view theorem_name) {
  if (!backend_.capabilities().has_interactive) {
    raise(ErrorKind::BackendUnavailable, "no interactive engine configured");
  }
  const std::string source = text::read_file(source_path);
  bool present = false;
  for (const auto& t : verify::find_theorems(vernac::split_sentences(source))) {
    if (t.name == theorem_name) present = true;
  }
  if (!present) raise(ErrorKind::TheoremNotFound, "no theorem named " + std::string(theorem_name));

  auto s = std::make_shared<Session>();
  try {
    s->engine = backend_.open_engine();
    s->state = s->engine->start(source_path, theorem_name);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EngineStartFailure || e.kind() == ErrorKind::BackendUnavailable) throw;
    raise(ErrorKind::EngineStartFailure, e.what());
  }
  GoalState goals = s->engine->goals(s->state);

  std::lock_guard lock(mu_);
  s->handle = SessionHandle{"s" + std::to_string(next_id_++), source_path, std::string(theorem_name), true};
  sessions_.emplace(s->handle.session_id, s);
  return {s->handle, goals};
}

StepResult SessionManager::step(std::string_view session_id, std::string_view tactic) {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  if (!s->handle.alive) raise(ErrorKind::SessionClosed, "session " + std::string(session_id) + " is closed");
  StepResult r;
  r.tactic = std::string(tactic);
  try {
    auto run = s->engine->run(s->state, as_sentence(tactic));
    r.message = run.message;
    if (!run.ok) return r;
    auto goals = s->engine->goals(run.state_token);
    r.outcome = goals.goals.empty() ? StepOutcome::Solved : StepOutcome::Advanced;
    s->state = run.state_token;
    r.goals_after = std::move(goals);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EngineCrash) {
      s->handle.alive = false;
      s->engine.reset();
    }
    throw;
  }
  return r;
}

std::vector<StepResult> SessionManager::step_multi(std::string_view session_id, const std::vector<std::string>& tactics) {
  if (tactics.empty()) raise(ErrorKind::InvalidArgument, "step_multi needs at least one tactic");
  if (tactics.size() > kMaxMultiTactics) {
    raise(ErrorKind::TooManyTactics, "at most " + std::to_string(kMaxMultiTactics) + " tactics per call, got " +
                                         std::to_string(tactics.size()));
  }
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  if (!s->handle.alive) raise(ErrorKind::SessionClosed, "session " + std::string(session_id) + " is closed");
  std::vector<StepResult> out;
  out.reserve(tactics.size());
  try {
    // Engine checkpoints are immutable, so each candidate starts from the
    // unchanged session state.
    for (const auto& tactic : tactics) {
      StepResult r;
      r.tactic = tactic;
      auto run = s->engine->run(s->state, as_sentence(tactic));
      r.message = run.message;
      if (run.ok) {
        auto goals = s->engine->goals(run.state_token);
        r.outcome = goals.goals.empty() ? StepOutcome::Solved : StepOutcome::Advanced;
        r.goals_after = std::move(goals);
      }
      out.push_back(std::move(r));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EngineCrash) {
      s->handle.alive = false;
      s->engine.reset();
    }
    throw;
  }
  return out;
}

GoalState SessionManager::current_goals(std::string_view session_id) {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  if (!s->handle.alive) raise(ErrorKind::SessionClosed, "session " + std::string(session_id) + " is closed");
  try {
    return s->engine->goals(s->state);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EngineCrash) {
      s->handle.alive = false;
      s->engine.reset();
    }
    throw;
  }
}

SessionHandle SessionManager::handle(std::string_view session_id) const {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  return s->handle;
}

void SessionManager::close_session(std::string_view session_id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return;
    s = it->second;
  }
  std::lock_guard lock(s->mu);
  s->handle.alive = false;
  s->engine.reset();
}

std::size_t SessionManager::live_sessions() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [id, s] : sessions_) {
    std::lock_guard slock(s->mu);
    if (s->handle.alive) ++n;
  }
  return n;
}

std::string SessionManager::run_command(const std::string& command, const std::optional<std::string>& session_id,
                                        const std::optional<std::filesystem::path>& context_file) {
  if (session_id) {
    auto s = find(*session_id);
    std::lock_guard lock(s->mu);
    if (!s->handle.alive) raise(ErrorKind::SessionClosed, "session " + *session_id + " is closed");
    backend::EngineRun run;
    try {
      run = s->engine->run(s->state, command);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::EngineCrash) {
        s->handle.alive = false;
        s->engine.reset();
      }
      throw;
    }
    if (!run.ok) raise(ErrorKind::QueryFailed, run.message);
    return run.message;
  }

  if (!backend_.capabilities().has_compiler) raise(ErrorKind::BackendUnavailable, "no compiler available");
  std::string probe;
  if (context_file) {
    probe = text::read_file(*context_file);
    if (!probe.empty() && probe.back() != '\n') probe += '\n';
  }
  const int command_line = static_cast<int>(std::count(probe.begin(), probe.end(), '\n')) + 2;
  probe += std::string(vernac::kMarkerSentence) + "\n" + command + "\n";

  diagnostics::CompileReport report;
  try {
    report = diagnostics::compile_and_report(backend_, probe, "query");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CompilerNotFound) raise(ErrorKind::BackendUnavailable, e.what());
    throw;
  }
  if (!report.success) {
    for (const auto& d : report.diagnostics) {
      if (d.severity != diagnostics::Severity::Error) continue;
      if (d.line >= command_line) raise(ErrorKind::QueryFailed, d.message);
      raise(ErrorKind::QueryFailed, "context file does not compile: " + first_line(d.message));
    }
    raise(ErrorKind::QueryFailed, "query compilation failed");
  }
  auto harvested = vernac::harvest_after_marker(report.raw.out);
  if (!harvested) raise(ErrorKind::QueryFailed, "no output captured for: " + command);
  return std::string(text::trim_right(*harvested));
}

std::string SessionManager::query(QueryKind kind, std::string_view argument, std::optional<std::string> session_id,
                                  std::optional<std::filesystem::path> context_file) {
  if (text::trim(argument).empty()) raise(ErrorKind::InvalidArgument, "query argument is empty");
  return run_command(as_sentence(std::string(to_string(kind)) + " " + std::string(text::trim(argument))), session_id,
                     context_file);
}

std::vector<NotationEntry> SessionManager::resolve_notation(std::string_view token, std::optional<std::string> session_id,
                                                            std::optional<std::filesystem::path> context_file) {
  auto tok = text::trim(token);
  if (tok.empty()) raise(ErrorKind::InvalidArgument, "notation token is empty");
  std::string quoted = "\"";
  for (char c : tok) {
    quoted += c;
    if (c == '"') quoted += '"';
  }
  quoted += '"';
  std::string output;
  try {
    output = run_command("Locate " + quoted + ".", session_id, context_file);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::QueryFailed && std::string_view(e.what()).find("Unknown notation") != std::string_view::npos) {
      raise(ErrorKind::NotationUnknown, e.what());
    }
    throw;
  }
  return parse_locate_notation(output);
}

std::string_view to_string(TocKind k) {
  switch (k) {
    case TocKind::Theorem: return "Theorem";
    case TocKind::Lemma: return "Lemma";
    case TocKind::Definition: return "Definition";
    case TocKind::Module: return "Module";
    case TocKind::Section: return "Section";
    case TocKind::Other: return "Other";
  }
  return "Other";
}

std::vector<TocEntry> toc_of_source(std::string_view source) {
  using vernac::DeclKind;
  std::vector<TocEntry> out;
  int depth = 0;
  for (const auto& s : vernac::split_sentences(source)) {
    auto decl = vernac::classify(s);
    if (!decl) continue;
    TocKind kind;
    switch (decl->kind) {
      case DeclKind::End:
        depth = std::max(0, depth - 1);
        continue;
      case DeclKind::Command:
        continue;
      case DeclKind::Theorem:
        kind = decl->keyword == "Theorem" ? TocKind::Theorem : TocKind::Lemma;
        break;
      case DeclKind::Definition:
      case DeclKind::Inductive:
        kind = TocKind::Definition;
        break;
      case DeclKind::Module:
      case DeclKind::ModuleType:
        kind = TocKind::Module;
        break;
      case DeclKind::Section:
        kind = TocKind::Section;
        break;
      default:
        kind = TocKind::Other;
        break;
    }
    std::string name = decl->names.empty() ? std::string() : decl->names.front();
    out.push_back(TocEntry{kind, std::move(name), s.line, depth});
    if (decl->opens_block) ++depth;
  }
  return out;
}

std::vector<TocEntry> toc(const std::filesystem::path& source_path) { return toc_of_source(text::read_file(source_path)); }

void to_json(nlohmann::json& j, const SessionHandle& h) {
  j = nlohmann::json{{"session_id", h.session_id},
                     {"source_path", h.source_path.string()},
                     {"theorem_name", h.theorem_name},
                     {"alive", h.alive}};
}

void to_json(nlohmann::json& j, const StepResult& r) {
  j = nlohmann::json{{"tactic", r.tactic}, {"outcome", to_string(r.outcome)}, {"message", r.message}};
  j["goals_after"] = r.goals_after ? nlohmann::json(*r.goals_after) : nlohmann::json();
}

void to_json(nlohmann::json& j, const NotationEntry& e) {
  j = nlohmann::json{{"notation", e.notation},
                     {"interpretation", e.interpretation},
                     {"scope", e.scope},
                     {"default", e.is_default}};
}

void to_json(nlohmann::json& j, const TocEntry& e) {
  j = nlohmann::json{{"kind", to_string(e.kind)}, {"name", e.name}, {"line", e.line}, {"depth", e.depth}};
}

}  // namespace rocq::interactive
