#include "rocq/diagnostics/report.hpp"

#include <algorithm>

#include "rocq/common/text.hpp"

namespace rocq::diagnostics {

namespace {

Diagnostic synthetic(std::string message, std::string_view source) {
  Diagnostic d;
  d.message = std::move(message);
  auto lines = text::split_lines(source);
  if (!lines.empty()) d.excerpt = std::string(lines.front());
  return d;
}

}  // namespace

void finalize(CompileReport& report, std::string_view source, const CategoryRules& rules) {
  const bool has_error = std::any_of(report.diagnostics.begin(), report.diagnostics.end(),
                                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
  report.success = report.raw.exit_status == 0 && !report.raw.timed_out && !has_error;
  report.categories.clear();
  for (const auto& d : report.diagnostics) report.categories.push_back(rules.classify(d));
  report.human_text = render_report(report.diagnostics, source);
}

CompileReport make_report(const backend::RawCompileResult& raw, std::string_view source,
                          std::string_view display_name, std::chrono::seconds timeout,
                          const CategoryRules& rules) {
  CompileReport r;
  r.raw = raw;
  r.diagnostics = parse_compiler_output(raw.out + raw.err, source);
  if (raw.timed_out) {
    r.diagnostics.push_back(
        synthetic("Timeout: compilation exceeded " + std::to_string(timeout.count()) + " s", source));
  } else if (raw.exit_status != 0 &&
             std::none_of(r.diagnostics.begin(), r.diagnostics.end(),
                          [](const Diagnostic& d) { return d.severity == Severity::Error; })) {
    std::string msg = "compiler exited with status " + std::to_string(raw.exit_status);
    auto err = text::trim(raw.err);
    if (!err.empty()) msg += "\n" + std::string(err);
    r.diagnostics.push_back(synthetic(std::move(msg), source));
  }
  for (auto& d : r.diagnostics) d.file = std::string(display_name);
  finalize(r, source, rules);
  return r;
}

CompileReport compile_and_report(const backend::ProverBackend& backend, std::string_view source,
                                 std::string_view display_name, const backend::CompileOptions& options,
                                 const CategoryRules& rules) {
  auto raw = backend.compile(source, options);
  return make_report(raw, source, display_name, options.timeout.value_or(backend.default_timeout()), rules);
}

void to_json(nlohmann::json& j, const CompileReport& r) {
  j = nlohmann::json::object();
  j["success"] = r.success;
  j["exit_status"] = r.raw.exit_status;
  j["timed_out"] = r.raw.timed_out;
  j["duration_ms"] = r.raw.duration_ms;
  auto diags = nlohmann::json::array();
  for (std::size_t i = 0; i < r.diagnostics.size(); ++i) {
    nlohmann::json d = r.diagnostics[i];
    d["category"] = to_string(r.categories.at(i));
    diags.push_back(std::move(d));
  }
  j["diagnostics"] = std::move(diags);
}

}  // namespace rocq::diagnostics
