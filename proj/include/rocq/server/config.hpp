#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "rocq/automation/auto_solve.hpp"
#include "rocq/backend/backend.hpp"
#include "rocq/diagnostics/diagnostics.hpp"
#include "rocq/verify/verify.hpp"

namespace rocq::server {

// Key-value configuration document:
//
//   compiler = /usr/bin/coqc
//   interactive_engine = /usr/bin/pet
//   workdir = /tmp/rocq
//   timeout = 60
//   extra_flags = -Q lib Lib
//   engine_flags =
//   whitelist = data/axiom_whitelist.txt
//   battery = data/tactic_battery.tsv
//   error_rules = data/error_categories.tsv
//   keep_artifacts = false
struct ServerConfig {
  backend::BackendConfig backend;
  std::optional<std::filesystem::path> whitelist;
  std::optional<std::filesystem::path> battery;
  std::optional<std::filesystem::path> error_rules;
  std::optional<std::filesystem::path> mock_script;  // replaces the real backend
};

// Throws Error{InvalidConfig} for unknown keys or bad values.
ServerConfig parse_config(std::string_view doc);
ServerConfig load_config(const std::filesystem::path& path);

// ROCQ_COMPILER and ROCQ_INTERACTIVE_ENGINE override the document. Without
// any interactive engine setting, `pet` is looked up on PATH.
void apply_environment(ServerConfig& config);

// Everything a running server needs, built once from a config.
struct Resources {
  std::unique_ptr<backend::ProverBackend> backend;
  verify::AxiomWhitelist whitelist;
  automation::TacticBattery battery;
  diagnostics::CategoryRules rules;

  static Resources from_config(const ServerConfig& config);
};

}  // namespace rocq::server
