#include <iostream>

#include <CLI11.hpp>

#include "rocq/analytics/analytics.hpp"
#include "rocq/automation/auto_solve.hpp"
#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"
#include "rocq/diagnostics/report.hpp"
#include "rocq/server/server.hpp"
#include "rocq/verify/verify.hpp"

using namespace rocq;

namespace {

struct Common {
  std::string config;
  std::string mock_script;
  bool json = false;

  server::Resources resources() const {
    server::ServerConfig c = config.empty() ? server::ServerConfig{} : server::load_config(config);
    server::apply_environment(c);
    if (!mock_script.empty()) c.mock_script = mock_script;
    return server::Resources::from_config(c);
  }
};

void add_common(CLI::App* app, Common& c, bool with_json = true) {
  app->add_option("--config", c.config, "Key-value configuration file")->check(CLI::ExistingFile);
  app->add_option("--mock-script", c.mock_script, "Replay a scripted backend instead of running the prover")
      ->check(CLI::ExistingFile);
  if (with_json) app->add_flag("--json", c.json, "Print the structured result instead of the text report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rocq proof tools: compile, verify, automation, tool server, log analysis"};
  app.require_subcommand(1);

  Common serve_c;
  std::size_t concurrency = 1;
  std::string framing = "lines";
  auto* serve = app.add_subcommand("serve", "Serve the tools as JSON-RPC over stdin/stdout");
  add_common(serve, serve_c, false);
  serve->add_option("--concurrency", concurrency, "Worker threads")->check(CLI::Range(1, 64));
  serve->add_option("--framing", framing, "lines or content-length")->check(CLI::IsMember({"lines", "content-length"}));

  Common compile_c;
  std::string compile_file;
  int compile_timeout = 0;
  auto* compile = app.add_subcommand("compile", "Compile a .v file and print the diagnostics report");
  add_common(compile, compile_c);
  compile->add_option("FILE", compile_file)->required()->check(CLI::ExistingFile);
  compile->add_option("--timeout", compile_timeout, "Seconds")->check(CLI::PositiveNumber);

  Common verify_c;
  std::string candidate, stub, verify_theorem;
  auto* verify = app.add_subcommand("verify", "Check a candidate proof against a problem stub");
  add_common(verify, verify_c);
  verify->add_option("CANDIDATE", candidate)->required()->check(CLI::ExistingFile);
  verify->add_option("--stub", stub)->required()->check(CLI::ExistingFile);
  verify->add_option("--theorem", verify_theorem, "Theorem name; defaults to the admitted one");

  Common auto_c;
  std::string auto_stub, auto_theorem;
  auto* autosolve = app.add_subcommand("auto-solve", "Try the tactic battery on a stub");
  add_common(autosolve, auto_c);
  autosolve->add_option("STUB", auto_stub)->required()->check(CLI::ExistingFile);
  autosolve->add_option("--theorem", auto_theorem);

  std::vector<std::string> logdirs;
  std::string prices, groups, roles, emit = "table";
  double gap_minutes = 30;
  auto* analyze = app.add_subcommand("analyze", "Summarize agent experiment logs");
  analyze->add_option("LOGDIR", logdirs, "Directories or .jsonl files")->required();
  analyze->add_option("--prices", prices, "Price schedule")->check(CLI::ExistingFile);
  analyze->add_option("--groups", groups, "Problem to difficulty group map")->check(CLI::ExistingFile);
  analyze->add_option("--roles", roles, "Role classification rules")->check(CLI::ExistingFile);
  analyze->add_option("--gap-threshold", gap_minutes, "Minutes")->check(CLI::PositiveNumber);
  analyze->add_option("--emit", emit)->check(CLI::IsMember({"table", "csv", "series"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      auto res = serve_c.resources();
      server::ToolServer srv(res);
      std::ios::sync_with_stdio(false);
      return srv.serve(std::cin, std::cout,
                       framing == "lines" ? framing::Framing::Lines : framing::Framing::ContentLength, concurrency);
    }
    if (*compile) {
      auto res = compile_c.resources();
      backend::CompileOptions opts;
      if (compile_timeout > 0) opts.timeout = std::chrono::seconds(compile_timeout);
      const auto name = std::filesystem::path(compile_file).filename().string();
      auto report = diagnostics::compile_and_report(*res.backend, text::read_file(compile_file), name, opts, res.rules);
      if (compile_c.json) std::cout << nlohmann::json(report).dump(2) << "\n";
      else std::cout << report.human_text;
      return report.success ? 0 : 1;
    }
    if (*verify) {
      auto res = verify_c.resources();
      std::optional<std::string> name;
      if (!verify_theorem.empty()) name = verify_theorem;
      const auto s = verify::CanonicalStub::from_source(text::read_file(stub), name);
      verify::VerifyOptions opts;
      opts.rules = &res.rules;
      auto v = verify::verify(*res.backend, text::read_file(candidate), s, res.whitelist, opts);
      if (verify_c.json) {
        std::cout << nlohmann::json(v).dump(2) << "\n";
      } else {
        std::cout << (v.accepted ? "accepted" : "rejected") << " (" << verify::to_string(v.phase) << ")\n";
        std::cout << "axioms:";
        for (const auto& a : v.axioms_used) std::cout << " " << a;
        std::cout << (v.axioms_used.empty() ? " none\n" : "\n");
        for (const auto& x : v.violations) std::cout << "  " << verify::to_string(x.kind) << ": " << x.detail << "\n";
        if (v.report && !v.report->success) std::cout << "\n" << v.report->human_text;
      }
      return v.accepted ? 0 : 1;
    }
    if (*autosolve) {
      auto res = auto_c.resources();
      std::optional<std::string> name;
      if (!auto_theorem.empty()) name = auto_theorem;
      const auto s = verify::CanonicalStub::from_source(text::read_file(auto_stub), name);
      auto r = automation::auto_solve(*res.backend, s, res.battery, res.rules);
      if (auto_c.json) {
        std::cout << nlohmann::json(r).dump(2) << "\n";
      } else {
        for (const auto& a : r.attempts) {
          std::cout << a.tactic << ": " << automation::to_string(a.outcome) << " (" << a.duration_ms << " ms)\n";
        }
        std::cout << (r.solved ? "solved by " + *r.winning_tactic : std::string("not solved")) << "\n";
      }
      return r.solved ? 0 : 1;
    }
    if (*analyze) {
      analytics::AnalysisOptions opts;
      if (!prices.empty()) opts.prices = analytics::PriceSchedule::load(prices);
      if (!groups.empty()) opts.groups = analytics::GroupMap::load(groups);
      if (!roles.empty()) opts.roles = analytics::RoleRules::load(roles);
      opts.gap_threshold = static_cast<analytics::Millis>(gap_minutes * static_cast<double>(analytics::kMinute));
      std::vector<std::filesystem::path> paths(logdirs.begin(), logdirs.end());
      const auto input = analytics::ingest(paths);
      const auto mode = emit == "csv" ? analytics::Emit::Csv : emit == "series" ? analytics::Emit::Series : analytics::Emit::Table;
      std::cout << analytics::render_analysis(input, opts, mode);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
