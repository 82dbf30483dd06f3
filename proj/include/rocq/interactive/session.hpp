#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rocq/backend/backend.hpp"

namespace rocq::interactive {

using backend::GoalState;

inline constexpr std::size_t kMaxMultiTactics = 20;

struct SessionHandle {
  std::string session_id;
  std::filesystem::path source_path;
  std::string theorem_name;
  bool alive = false;
};

enum class StepOutcome { Advanced, Solved, Failed };
std::string_view to_string(StepOutcome o);

struct StepResult {
  std::string tactic;
  StepOutcome outcome = StepOutcome::Failed;
  std::string message;
  std::optional<GoalState> goals_after;  // absent when Failed
};

enum class QueryKind { Search, Check, Print, About };
std::string_view to_string(QueryKind k);
// Throws Error{InvalidQueryKind}.
QueryKind parse_query_kind(std::string_view name);

// One `Notation "..." := (...) : scope` line of a Locate answer.
struct NotationEntry {
  std::string notation;        // with its quotes
  std::string interpretation;  // outer parentheses removed
  std::string scope;           // empty for notations outside any scope
  bool is_default = false;
};

// Parses the output of `Locate "<token>".` Throws Error{NotationUnknown}.
std::vector<NotationEntry> parse_locate_notation(std::string_view output);

// Owns one interactive engine per session. Commands within a session are
// serialized; distinct sessions proceed independently.
class SessionManager {
 public:
  explicit SessionManager(const backend::ProverBackend& backend);
  ~SessionManager();

  // Throws BackendUnavailable, FileNotFound, TheoremNotFound, EngineStartFailure.
  std::pair<SessionHandle, GoalState> start_session(const std::filesystem::path& source_path,
                                                    std::string_view theorem_name);

  // Failed steps leave the session where it was. Throws SessionClosed, and
  // EngineCrash (after which the session is dead).
  StepResult step(std::string_view session_id, std::string_view tactic);

  // Every tactic runs from the same pre-call state; the session does not move.
  // Throws InvalidArgument (no tactics), TooManyTactics, SessionClosed, EngineCrash.
  std::vector<StepResult> step_multi(std::string_view session_id, const std::vector<std::string>& tactics);

  GoalState current_goals(std::string_view session_id);
  SessionHandle handle(std::string_view session_id) const;

  // Idempotent; unknown ids are acknowledged as well.
  void close_session(std::string_view session_id);

  // With a session the command runs in the engine at the current state.
  // Otherwise a probe file (the context file, if any, then the command) is
  // compiled and the command's output harvested. Throws QueryFailed,
  // SessionClosed, FileNotFound, BackendUnavailable.
  std::string query(QueryKind kind, std::string_view argument, std::optional<std::string> session_id = {},
                    std::optional<std::filesystem::path> context_file = {});

  // Throws NotationUnknown, InvalidArgument for an empty token, and the
  // errors of query().
  std::vector<NotationEntry> resolve_notation(std::string_view token, std::optional<std::string> session_id = {},
                                              std::optional<std::filesystem::path> context_file = {});

  std::size_t live_sessions() const;

 private:
  struct Session;
  std::shared_ptr<Session> find(std::string_view session_id) const;
  std::string run_command(const std::string& command, const std::optional<std::string>& session_id,
                          const std::optional<std::filesystem::path>& context_file);

  const backend::ProverBackend& backend_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
  std::uint64_t next_id_ = 1;
};

enum class TocKind { Theorem, Lemma, Definition, Module, Section, Other };
std::string_view to_string(TocKind k);

struct TocEntry {
  TocKind kind = TocKind::Other;
  std::string name;
  int line = 1;
  int depth = 0;

  bool operator==(const TocEntry&) const = default;
};

// Lexical outline; works on files that do not compile. Throws FileNotFound.
std::vector<TocEntry> toc(const std::filesystem::path& source_path);
std::vector<TocEntry> toc_of_source(std::string_view source);

void to_json(nlohmann::json& j, const SessionHandle& h);
void to_json(nlohmann::json& j, const StepResult& r);
void to_json(nlohmann::json& j, const NotationEntry& e);
void to_json(nlohmann::json& j, const TocEntry& e);

}  // namespace rocq::interactive
