#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rocq/backend/backend.hpp"

namespace rocq::backend {

// Scripted prover for hermetic tests. Loaded from JSON:
//
//   {
//     "capabilities": {"compiler": true, "interactive": true},
//     "compile": [ {"source": "..." | "fingerprint": "...",
//                   "exit_status": 0, "stdout": "", "stderr": "",
//                   "duration_ms": 5, "timed_out": false}, ... ],
//     "engine": {
//       "theorems": {"t": 0},
//       "states":   {"0": [{"hypotheses": ["n : nat"], "conclusion": "n = n"}], "1": []},
//       "steps":    [ {"state": 0, "tactic": "reflexivity", "next": 1},
//                     {"state": 0, "tactic": "lia", "error": "..."},
//                     {"state": "*", "tactic": "crash_now", "crash": true} ],
//       "commands": [ {"text": "Check 42.", "output": "42\n     : nat"} ]
//     }
//   }
struct MockStep {
  std::optional<int> next;
  std::string error;
  bool crash = false;
};

struct MockCommand {
  std::string output;
  std::string error;  // non-empty: the command fails with this message
};

struct MockScript {
  BackendCapabilities caps{true, true};
  std::map<std::string, RawCompileResult> compile_table;  // fingerprint -> result
  std::map<std::string, int> theorems;
  std::map<int, std::vector<Goal>> states;
  std::map<std::pair<std::string, std::string>, MockStep> step_table;  // (state or "*", tactic)
  std::map<std::string, MockCommand> commands;

  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);

  void add_compile(std::string_view source, RawCompileResult result);

  // Tactic keys ignore surrounding blanks and one trailing '.'.
  static std::string tactic_key(std::string_view tactic);
};

class MockBackend final : public ProverBackend {
 public:
  explicit MockBackend(MockScript script, std::chrono::seconds default_timeout = std::chrono::seconds(60));

  // Throws Error{Unscripted} for sources absent from the compile table.
  RawCompileResult compile(std::string_view source, const CompileOptions& options = {}) const override;
  BackendCapabilities capabilities() const override { return script_->caps; }
  std::unique_ptr<ProofEngine> open_engine() const override;
  std::chrono::seconds default_timeout() const override { return timeout_; }

  const MockScript& script() const { return *script_; }

 private:
  std::shared_ptr<const MockScript> script_;
  std::chrono::seconds timeout_;
};

class MockEngine final : public ProofEngine {
 public:
  explicit MockEngine(std::shared_ptr<const MockScript> script) : script_(std::move(script)) {}

  std::string start(const std::filesystem::path& file, std::string_view theorem) override;
  // Unknown (state, tactic) pairs fail with a message starting "unscripted".
  EngineRun run(std::string_view state_token, std::string_view text) override;
  GoalState goals(std::string_view state_token) override;
  bool alive() const override { return alive_; }

 private:
  int state_of(std::string_view token) const;
  void ensure_alive() const;

  std::shared_ptr<const MockScript> script_;
  bool alive_ = true;
};

}  // namespace rocq::backend
