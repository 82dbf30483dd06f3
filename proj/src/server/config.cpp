#include "rocq/server/config.hpp"

#include <cstdlib>
#include <sstream>

#include "rocq/backend/mock.hpp"
#include "rocq/backend/process.hpp"
#include "rocq/backend/subprocess_backend.hpp"
#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"

namespace rocq::server {

namespace {

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  raise(ErrorKind::InvalidConfig, key + " must be true or false, got " + v);
}

}  // namespace

ServerConfig parse_config(std::string_view doc) {
  ServerConfig c;
  for (const auto& [key, value] : text::parse_key_values(doc)) {
    if (key == "compiler") {
      c.backend.compiler_path = value;
    } else if (key == "interactive_engine") {
      if (!value.empty()) c.backend.interactive_engine_path = std::filesystem::path(value);
    } else if (key == "workdir") {
      c.backend.workdir = value;
    } else if (key == "timeout") {
      long secs = 0;
      try {
        std::size_t used = 0;
        secs = std::stol(value, &used);
        if (used != value.size()) secs = 0;
      } catch (const std::exception&) {
        secs = 0;
      }
      if (secs < 1) raise(ErrorKind::InvalidConfig, "timeout must be a whole number of seconds >= 1");
      c.backend.default_timeout = std::chrono::seconds(secs);
    } else if (key == "extra_flags") {
      c.backend.extra_flags = words(value);
    } else if (key == "engine_flags") {
      c.backend.engine_flags = words(value);
    } else if (key == "whitelist") {
      c.whitelist = value;
    } else if (key == "battery") {
      c.battery = value;
    } else if (key == "error_rules") {
      c.error_rules = value;
    } else if (key == "keep_artifacts") {
      c.backend.keep_artifacts = parse_bool(key, value);
    } else if (key == "mock_script") {
      c.mock_script = value;
    } else {
      raise(ErrorKind::InvalidConfig, "unknown configuration key: " + key);
    }
  }
  return c;
}

ServerConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(text::read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::FileNotFound) raise(ErrorKind::InvalidConfig, e.what());
    throw;
  }
}

void apply_environment(ServerConfig& config) {
  if (const char* c = std::getenv("ROCQ_COMPILER"); c && *c) config.backend.compiler_path = c;
  if (const char* e = std::getenv("ROCQ_INTERACTIVE_ENGINE"); e && *e) {
    config.backend.interactive_engine_path = std::filesystem::path(e);
  }
  if (!config.backend.interactive_engine_path) {
    if (auto pet = backend::find_executable("pet")) config.backend.interactive_engine_path = *pet;
  }
}

Resources Resources::from_config(const ServerConfig& config) {
  Resources r{nullptr, verify::AxiomWhitelist::defaults(), automation::TacticBattery::defaults(),
              diagnostics::CategoryRules::defaults()};
  if (config.mock_script) {
    r.backend = std::make_unique<backend::MockBackend>(backend::MockScript::load(*config.mock_script),
                                                       config.backend.default_timeout);
  } else {
    r.backend = std::make_unique<backend::SubprocessBackend>(config.backend);
  }
  if (config.whitelist) r.whitelist = verify::AxiomWhitelist::load(*config.whitelist);
  if (config.battery) r.battery = automation::TacticBattery::load(*config.battery);
  if (config.error_rules) r.rules = diagnostics::CategoryRules::parse(text::read_file(*config.error_rules));
  return r;
}

}  // namespace rocq::server
