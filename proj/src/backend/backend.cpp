#include "rocq/backend/backend.hpp"

#include <unistd.h>

#include "rocq/backend/process.hpp"
#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"

namespace rocq::backend {

void BackendConfig::validate() const {
  if (default_timeout < std::chrono::seconds(1)) {
    raise(ErrorKind::InvalidConfig, "default_timeout must be at least 1 second");
  }
  std::error_code ec;
  if (!std::filesystem::is_directory(workdir, ec)) {
    raise(ErrorKind::InvalidConfig, "workdir is not a directory: " + workdir.string());
  }
  if (::access(workdir.c_str(), W_OK) != 0) {
    raise(ErrorKind::InvalidConfig, "workdir is not writable: " + workdir.string());
  }
}

void to_json(nlohmann::json& j, const RawCompileResult& r) {
  j = nlohmann::json{{"exit_status", r.exit_status},
                     {"stdout", r.out},
                     {"stderr", r.err},
                     {"duration_ms", r.duration_ms},
                     {"timed_out", r.timed_out}};
}

void from_json(const nlohmann::json& j, RawCompileResult& r) {
  r.exit_status = j.value("exit_status", 0);
  r.out = j.value("stdout", std::string());
  r.err = j.value("stderr", std::string());
  r.duration_ms = j.value("duration_ms", std::int64_t{0});
  r.timed_out = j.value("timed_out", false);
}

BackendCapabilities capabilities(const BackendConfig& config) {
  BackendCapabilities caps;
  caps.has_compiler = find_executable(config.compiler_path).has_value();
  caps.has_interactive = caps.has_compiler && config.interactive_engine_path &&
                         find_executable(*config.interactive_engine_path).has_value();
  return caps;
}

void to_json(nlohmann::json& j, const Goal& g) {
  j = nlohmann::json{{"hypotheses", g.hypotheses}, {"conclusion", g.conclusion}};
}

void to_json(nlohmann::json& j, const GoalState& g) {
  j = nlohmann::json{{"goals", g.goals}, {"state_token", g.state_token}};
}

std::string serialize(const GoalState& g) { return nlohmann::json(g).dump(); }

std::string source_fingerprint(std::string_view source) {
  return text::fnv1a_hex(text::collapse_whitespace(source));
}

}  // namespace rocq::backend
