#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rocq::backend {

// Immutable once a backend is built from it.
struct BackendConfig {
  std::filesystem::path compiler_path = "coqc";
  std::optional<std::filesystem::path> interactive_engine_path;
  std::chrono::seconds default_timeout{60};
  std::filesystem::path workdir = std::filesystem::temp_directory_path();
  std::vector<std::string> extra_flags;
  std::vector<std::string> engine_flags;
  bool keep_artifacts = false;

  // Throws Error{InvalidConfig} unless default_timeout >= 1 s and workdir is
  // an existing writable directory.
  void validate() const;
};

struct CompileOptions {
  std::optional<std::chrono::seconds> timeout;
  std::optional<bool> keep_artifacts;
};

struct RawCompileResult {
  int exit_status = 0;
  std::string out;
  std::string err;
  std::int64_t duration_ms = 0;
  bool timed_out = false;

  bool operator==(const RawCompileResult&) const = default;
};

void to_json(nlohmann::json& j, const RawCompileResult& r);
void from_json(const nlohmann::json& j, RawCompileResult& r);

struct BackendCapabilities {
  bool has_compiler = false;
  bool has_interactive = false;

  bool operator==(const BackendCapabilities&) const = default;
};

// Probes the configured executables. Never throws.
BackendCapabilities capabilities(const BackendConfig& config);

struct Goal {
  std::vector<std::string> hypotheses;
  std::string conclusion;

  bool operator==(const Goal&) const = default;
};

struct GoalState {
  std::vector<Goal> goals;  // empty: proof complete
  std::string state_token;  // restorable engine checkpoint

  bool operator==(const GoalState&) const = default;
};

void to_json(nlohmann::json& j, const Goal& g);
void to_json(nlohmann::json& j, const GoalState& g);
// Canonical byte string used for before/after comparisons.
std::string serialize(const GoalState& g);

struct EngineRun {
  bool ok = false;
  std::string state_token;  // resulting checkpoint when ok
  std::string message;      // engine feedback, or the error text when !ok
};

// One interactive engine instance. Checkpoints are immutable: running a
// tactic on a token yields a new token and leaves the old one valid.
// Any method throws Error{EngineCrash} once the engine has died.
class ProofEngine {
 public:
  virtual ~ProofEngine() = default;

  // Positions the engine at the start of the named theorem's proof.
  virtual std::string start(const std::filesystem::path& file, std::string_view theorem) = 0;
  // Runs a tactic or a vernacular command against a checkpoint.
  virtual EngineRun run(std::string_view state_token, std::string_view text) = 0;
  virtual GoalState goals(std::string_view state_token) = 0;
  virtual bool alive() const = 0;
};

class ProverBackend {
 public:
  virtual ~ProverBackend() = default;

  virtual RawCompileResult compile(std::string_view source, const CompileOptions& options = {}) const = 0;
  virtual BackendCapabilities capabilities() const = 0;
  // Throws Error{BackendUnavailable} without an interactive engine.
  virtual std::unique_ptr<ProofEngine> open_engine() const = 0;
  virtual std::chrono::seconds default_timeout() const = 0;
};

// Whitespace-normalized source hash; the key of scripted compile results.
std::string source_fingerprint(std::string_view source);

}  // namespace rocq::backend
