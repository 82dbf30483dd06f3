#pragma once

#include <atomic>
#include <memory>

#include "rocq/backend/backend.hpp"
#include "rocq/backend/process.hpp"
#include "rocq/common/framing.hpp"

namespace rocq::backend {

// Drives the real compiler (one fresh temporary file per compile) and, when
// configured, the petanque interactive engine.
class SubprocessBackend final : public ProverBackend {
 public:
  explicit SubprocessBackend(BackendConfig config);

  RawCompileResult compile(std::string_view source, const CompileOptions& options = {}) const override;
  BackendCapabilities capabilities() const override;
  std::unique_ptr<ProofEngine> open_engine() const override;
  std::chrono::seconds default_timeout() const override { return config_.default_timeout; }

  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
  mutable std::atomic<std::uint64_t> counter_{0};
  std::string nonce_;
};

// JSON-RPC client for `pet` (coq-lsp's petanque server) speaking
// Content-Length framed messages over the child's stdio.
class PetEngine final : public ProofEngine {
 public:
  PetEngine(std::vector<std::string> argv, const std::filesystem::path& cwd,
            std::chrono::milliseconds request_timeout);

  std::string start(const std::filesystem::path& file, std::string_view theorem) override;
  EngineRun run(std::string_view state_token, std::string_view text) override;
  GoalState goals(std::string_view state_token) override;
  bool alive() const override { return alive_; }

 private:
  struct Reply {
    bool ok = false;
    nlohmann::json result;
    std::string error;
  };
  Reply request(const std::string& method, nlohmann::json params);
  [[noreturn]] void die(const std::string& why);

  ChildProcess child_;
  std::chrono::milliseconds timeout_;
  framing::Decoder decoder_{framing::Framing::ContentLength};
  std::int64_t next_id_ = 1;
  bool alive_ = true;
};

// Decoding helpers shared with the test double that emulates the engine.
namespace petanque {
// Accepts both the bare-integer and the RunResult object forms.
std::int64_t state_of(const nlohmann::json& result);
std::string feedback_text(const nlohmann::json& result);
std::vector<Goal> goals_of(const nlohmann::json& result);
}  // namespace petanque

}  // namespace rocq::backend
