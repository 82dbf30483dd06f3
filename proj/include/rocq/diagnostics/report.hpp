#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rocq/backend/backend.hpp"
#include "rocq/diagnostics/diagnostics.hpp"

namespace rocq::diagnostics {

struct CompileReport {
  bool success = false;  // exit status 0 and no Error diagnostic
  std::vector<Diagnostic> diagnostics;
  std::vector<ErrorCategory> categories;  // parallel to diagnostics
  backend::RawCompileResult raw;
  std::string human_text;  // render_report over the compiled source
};

// Builds a report from a finished compile. Every diagnostic is attributed to
// `display_name`. A timeout, or a failing exit status that produced no Error
// diagnostic, is turned into a synthetic Error at line 1.
CompileReport make_report(const backend::RawCompileResult& raw, std::string_view source,
                          std::string_view display_name, std::chrono::seconds timeout,
                          const CategoryRules& rules = CategoryRules::defaults());

CompileReport compile_and_report(const backend::ProverBackend& backend, std::string_view source,
                                 std::string_view display_name, const backend::CompileOptions& options = {},
                                 const CategoryRules& rules = CategoryRules::defaults());

void finalize(CompileReport& report, std::string_view source, const CategoryRules& rules);

void to_json(nlohmann::json& j, const CompileReport& r);

}  // namespace rocq::diagnostics
