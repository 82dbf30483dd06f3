#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rocq/backend/backend.hpp"
#include "rocq/diagnostics/diagnostics.hpp"
#include "rocq/verify/stub.hpp"

namespace rocq::automation {

struct BatteryEntry {
  std::string tactic;  // without the terminating '.'
  std::chrono::seconds timeout{10};
};

struct TacticBattery {
  std::vector<BatteryEntry> entries;
  std::vector<std::string> prelude;  // sentences placed before the stub

  static std::string_view default_text();
  static const TacticBattery& defaults();
  // Throws Error{InvalidConfig} for malformed lines, timeouts below 1 s or an
  // empty battery.
  static TacticBattery parse(std::string_view doc);
  static TacticBattery load(const std::filesystem::path& path);
};

enum class AttemptOutcome { Solved, Failed, TimedOut };
std::string_view to_string(AttemptOutcome o);

struct Attempt {
  std::string tactic;
  AttemptOutcome outcome = AttemptOutcome::Failed;
  std::int64_t duration_ms = 0;
  std::string message;  // first compiler error when the attempt failed
};

struct AutoSolveResult {
  bool solved = false;
  std::optional<std::string> winning_tactic;
  std::optional<std::string> winning_source;  // complete file that compiled
  std::vector<Attempt> attempts;
};

void to_json(nlohmann::json& j, const AutoSolveResult& r);

// The stub with its admitted proof replaced by `Proof. <tactic>. Qed.`,
// preceded by the battery prelude.
std::string attempt_source(const verify::CanonicalStub& stub, const TacticBattery& battery, std::string_view tactic);

// Tries the battery in order, one independent compile per entry, and stops at
// the first success. Throws Error{BackendUnavailable} without a compiler.
AutoSolveResult auto_solve(const backend::ProverBackend& backend, const verify::CanonicalStub& stub,
                           const TacticBattery& battery = TacticBattery::defaults(),
                           const diagnostics::CategoryRules& rules = diagnostics::CategoryRules::defaults());

}  // namespace rocq::automation
