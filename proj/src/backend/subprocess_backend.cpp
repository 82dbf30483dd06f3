#include "rocq/backend/subprocess_backend.hpp"

#include <random>
#include <sstream>

#include <unistd.h>

#include "rocq/common/error.hpp"
#include "rocq/common/framing.hpp"
#include "rocq/common/text.hpp"

namespace rocq::backend {

namespace {

// Removes the source and everything the compiler derives from it.
class ArtifactGuard {
 public:
  ArtifactGuard(std::filesystem::path dir, std::string stem, bool keep)
      : dir_(std::move(dir)), stem_(std::move(stem)), keep_(keep) {}
  ~ArtifactGuard() {
    if (keep_) return;
    std::error_code ec;
    for (const char* ext : {".v", ".vo", ".vok", ".vos", ".glob"}) {
      std::filesystem::remove(dir_ / (stem_ + ext), ec);
    }
    std::filesystem::remove(dir_ / ("." + stem_ + ".aux"), ec);
  }
  ArtifactGuard(const ArtifactGuard&) = delete;
  ArtifactGuard& operator=(const ArtifactGuard&) = delete;

 private:
  std::filesystem::path dir_;
  std::string stem_;
  bool keep_;
};

std::string random_nonce() {
  std::random_device rd;
  std::ostringstream ss;
  ss << std::hex << rd();
  return ss.str();
}

}  // namespace

SubprocessBackend::SubprocessBackend(BackendConfig config)
    : config_(std::move(config)), nonce_(random_nonce()) {
  config_.validate();
}

RawCompileResult SubprocessBackend::compile(std::string_view source, const CompileOptions& options) const {
  if (text::trim(source).empty()) raise(ErrorKind::InvalidArgument, "source is empty");
  auto timeout = options.timeout.value_or(config_.default_timeout);
  if (timeout < std::chrono::seconds(1)) raise(ErrorKind::InvalidArgument, "timeout must be at least 1 second");
  if (!find_executable(config_.compiler_path)) {
    raise(ErrorKind::CompilerNotFound, "compiler not found: " + config_.compiler_path.string());
  }

  // Compiled file names must be valid module identifiers.
  const std::string stem = "rocq_" + std::to_string(::getpid()) + "_" + nonce_ + "_" +
                           std::to_string(counter_.fetch_add(1));
  ArtifactGuard guard(config_.workdir, stem, options.keep_artifacts.value_or(config_.keep_artifacts));
  text::write_file(config_.workdir / (stem + ".v"), source);

  ProcessSpec spec;
  spec.argv.push_back(config_.compiler_path.string());
  spec.argv.insert(spec.argv.end(), config_.extra_flags.begin(), config_.extra_flags.end());
  spec.argv.push_back(stem + ".v");
  spec.cwd = config_.workdir;
  spec.env = sanitized_environment();
  spec.timeout = timeout;

  auto pr = run_process(spec);
  RawCompileResult r;
  r.exit_status = pr.exit_status;
  r.out = std::move(pr.out);
  r.err = std::move(pr.err);
  r.duration_ms = pr.duration_ms;
  r.timed_out = pr.timed_out;
  return r;
}

BackendCapabilities SubprocessBackend::capabilities() const { return backend::capabilities(config_); }

std::unique_ptr<ProofEngine> SubprocessBackend::open_engine() const {
  if (!capabilities().has_interactive) {
    raise(ErrorKind::BackendUnavailable, "no interactive engine configured");
  }
  std::vector<std::string> argv{config_.interactive_engine_path->string()};
  argv.insert(argv.end(), config_.engine_flags.begin(), config_.engine_flags.end());
  return std::make_unique<PetEngine>(std::move(argv), config_.workdir,
                                     std::chrono::duration_cast<std::chrono::milliseconds>(config_.default_timeout));
}

// --- petanque -------------------------------------------------------------

namespace petanque {

std::int64_t state_of(const nlohmann::json& result) {
  if (result.is_number_integer()) return result.get<std::int64_t>();
  if (result.is_object() && result.contains("st") && result["st"].is_number_integer()) {
    return result["st"].get<std::int64_t>();
  }
  raise(ErrorKind::EngineCrash, "engine answer carries no state: " + result.dump());
}

std::string feedback_text(const nlohmann::json& result) {
  if (!result.is_object() || !result.contains("feedback") || !result["feedback"].is_array()) return {};
  std::string out;
  for (const auto& item : result["feedback"]) {
    std::string msg;
    if (item.is_array() && item.size() >= 2 && item[1].is_string()) msg = item[1].get<std::string>();
    else if (item.is_string()) msg = item.get<std::string>();
    else if (item.is_object() && item.contains("message") && item["message"].is_string()) msg = item["message"];
    if (msg.empty()) continue;
    if (!out.empty()) out += '\n';
    out += msg;
  }
  return out;
}

namespace {
Goal goal_of(const nlohmann::json& g) {
  Goal goal;
  if (g.contains("ty") && g["ty"].is_string()) goal.conclusion = g["ty"].get<std::string>();
  if (g.contains("hyps") && g["hyps"].is_array()) {
    for (const auto& h : g["hyps"]) {
      std::string names;
      for (const auto& n : h.value("names", nlohmann::json::array())) {
        if (!names.empty()) names += ", ";
        names += n.get<std::string>();
      }
      std::string line = names;
      if (h.contains("def") && h["def"].is_string()) line += " := " + h["def"].get<std::string>();
      line += " : " + h.value("ty", std::string());
      goal.hypotheses.push_back(std::move(line));
    }
  }
  return goal;
}
}  // namespace

std::vector<Goal> goals_of(const nlohmann::json& result) {
  std::vector<Goal> goals;
  if (!result.is_object()) return goals;
  for (const auto& g : result.value("goals", nlohmann::json::array())) goals.push_back(goal_of(g));
  // Unfocused goals (bullets / braces) keep the proof open as well.
  for (const auto& frame : result.value("stack", nlohmann::json::array())) {
    if (!frame.is_array()) continue;
    for (const auto& side : frame) {
      if (!side.is_array()) continue;
      for (const auto& g : side) goals.push_back(goal_of(g));
    }
  }
  return goals;
}

}  // namespace petanque

PetEngine::PetEngine(std::vector<std::string> argv, const std::filesystem::path& cwd,
                     std::chrono::milliseconds request_timeout)
    : child_(std::move(argv), cwd), timeout_(request_timeout) {}

void PetEngine::die(const std::string& why) {
  alive_ = false;
  child_.terminate();
  raise(ErrorKind::EngineCrash, why);
}

PetEngine::Reply PetEngine::request(const std::string& method, nlohmann::json params) {
  if (!alive_) raise(ErrorKind::EngineCrash, "engine is not running");
  const std::int64_t id = next_id_++;
  nlohmann::json msg{{"jsonrpc", "2.0"}, {"id", id}, {"method", method}, {"params", std::move(params)}};
  if (!child_.write_all(framing::encode(msg.dump(), framing::Framing::ContentLength))) {
    die("engine closed its input");
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (true) {
    while (auto frame = decoder_.next()) {
      auto reply = nlohmann::json::parse(*frame, nullptr, false);
      if (reply.is_discarded() || !reply.is_object()) continue;
      if (!reply.contains("id") || reply["id"] != id) continue;  // notifications, stale replies
      Reply r;
      if (reply.contains("error")) {
        r.error = reply["error"].value("message", std::string("engine error"));
      } else {
        r.ok = true;
        r.result = reply.value("result", nlohmann::json());
      }
      return r;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) die("engine did not answer " + method + " in time");
    auto chunk = child_.read_some(left);
    if (!chunk) continue;
    if (chunk->empty()) die("engine exited during " + method);
    decoder_.feed(*chunk);
  }
}

std::string PetEngine::start(const std::filesystem::path& file, std::string_view theorem) {
  auto abs = std::filesystem::absolute(file);
  auto reply = request("petanque/start",
                       {{"uri", "file://" + abs.string()}, {"thm", std::string(theorem)}, {"pre_commands", nullptr}});
  if (!reply.ok) raise(ErrorKind::EngineStartFailure, reply.error);
  return std::to_string(petanque::state_of(reply.result));
}

EngineRun PetEngine::run(std::string_view state_token, std::string_view text) {
  std::int64_t st = std::stoll(std::string(state_token));
  auto reply = request("petanque/run", {{"st", st}, {"tac", std::string(text)}});
  EngineRun r;
  if (!reply.ok) {
    r.message = reply.error;
    return r;
  }
  r.ok = true;
  r.state_token = std::to_string(petanque::state_of(reply.result));
  r.message = petanque::feedback_text(reply.result);
  return r;
}

GoalState PetEngine::goals(std::string_view state_token) {
  std::int64_t st = std::stoll(std::string(state_token));
  auto reply = request("petanque/goals", {{"st", st}});
  if (!reply.ok) die("goals request failed: " + reply.error);
  GoalState gs;
  gs.state_token = std::string(state_token);
  gs.goals = petanque::goals_of(reply.result);
  return gs;
}

}  // namespace rocq::backend
