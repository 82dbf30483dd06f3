#include "rocq/automation/auto_solve.hpp"

#include <charconv>

#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"
#include "rocq/diagnostics/report.hpp"
#include "rocq/embedded/tactic_battery.hpp"

namespace rocq::automation {

std::string_view to_string(AttemptOutcome o) {
  switch (o) {
    case AttemptOutcome::Solved: return "Solved";
    case AttemptOutcome::Failed: return "Failed";
    case AttemptOutcome::TimedOut: return "TimedOut";
  }
  return "Failed";
}

std::string_view TacticBattery::default_text() { return embedded::tactic_battery; }

const TacticBattery& TacticBattery::defaults() {
  static const TacticBattery b = parse(default_text());
  return b;
}

TacticBattery TacticBattery::parse(std::string_view doc) {
  TacticBattery b;
  for (const auto& line : text::data_lines(doc)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) raise(ErrorKind::InvalidConfig, "battery line without a tab: " + line);
    auto head = text::trim(std::string_view(line).substr(0, tab));
    auto body = std::string(text::trim(std::string_view(line).substr(tab + 1)));
    if (head == "@prelude") {
      b.prelude.push_back(body);
      continue;
    }
    long secs = 0;
    auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), secs);
    if (ec != std::errc() || ptr != head.data() + head.size() || secs < 1) {
      raise(ErrorKind::InvalidConfig, "battery timeout must be a whole number of seconds >= 1: " + line);
    }
    while (!body.empty() && body.back() == '.') body.pop_back();
    if (text::trim(body).empty()) raise(ErrorKind::InvalidConfig, "battery line without a tactic: " + line);
    b.entries.push_back(BatteryEntry{body, std::chrono::seconds(secs)});
  }
  if (b.entries.empty()) raise(ErrorKind::InvalidConfig, "tactic battery is empty");
  return b;
}

TacticBattery TacticBattery::load(const std::filesystem::path& path) { return parse(text::read_file(path)); }

std::string attempt_source(const verify::CanonicalStub& stub, const TacticBattery& battery, std::string_view tactic) {
  std::string src;
  for (const auto& p : battery.prelude) src += p + "\n";
  return src + stub.with_proof("Proof. " + std::string(tactic) + ". Qed.");
}

void to_json(nlohmann::json& j, const AutoSolveResult& r) {
  j = nlohmann::json::object();
  j["solved"] = r.solved;
  j["winning_tactic"] = r.winning_tactic ? nlohmann::json(*r.winning_tactic) : nlohmann::json();
  auto attempts = nlohmann::json::array();
  for (const auto& a : r.attempts) {
    attempts.push_back({{"tactic", a.tactic},
                        {"outcome", to_string(a.outcome)},
                        {"duration_ms", a.duration_ms},
                        {"message", a.message}});
  }
  j["attempts"] = std::move(attempts);
}

AutoSolveResult auto_solve(const backend::ProverBackend& backend, const verify::CanonicalStub& stub,
                           const TacticBattery& battery, const diagnostics::CategoryRules& rules) {
  if (!backend.capabilities().has_compiler) raise(ErrorKind::BackendUnavailable, "no compiler available");
  AutoSolveResult result;
  for (const auto& entry : battery.entries) {
    const std::string source = attempt_source(stub, battery, entry.tactic);
    Attempt a;
    a.tactic = entry.tactic;
    try {
      backend::CompileOptions opts{entry.timeout, std::nullopt};
      auto report = diagnostics::compile_and_report(backend, source, "auto_solve", opts, rules);
      a.duration_ms = report.raw.duration_ms;
      if (report.success) {
        a.outcome = AttemptOutcome::Solved;
      } else if (report.raw.timed_out) {
        a.outcome = AttemptOutcome::TimedOut;
      }
      for (const auto& d : report.diagnostics) {
        if (d.severity != diagnostics::Severity::Error) continue;
        a.message = d.message.substr(0, d.message.find('\n'));
        break;
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::CompilerNotFound) raise(ErrorKind::BackendUnavailable, e.what());
      if (e.kind() != ErrorKind::SpawnFailure) throw;
      a.message = e.what();
    }
    const bool won = a.outcome == AttemptOutcome::Solved;
    result.attempts.push_back(std::move(a));
    if (won) {
      result.solved = true;
      result.winning_tactic = entry.tactic;
      result.winning_source = source;
      break;
    }
  }
  return result;
}

}  // namespace rocq::automation
