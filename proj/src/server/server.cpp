#include "rocq/server/server.hpp"

#include <condition_variable>
#include <deque>
#include <functional>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include "rocq/automation/auto_solve.hpp"
#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"
#include "rocq/diagnostics/report.hpp"
#include "rocq/server/schema.hpp"
#include "rocq/verify/verify.hpp"

namespace rocq::server {

using nlohmann::json;

namespace {

json str(std::string description) { return json{{"type", "string"}, {"description", std::move(description)}}; }

json object_schema(json properties, json required = json::array()) {
  json s{{"type", "object"}, {"properties", std::move(properties)}, {"additionalProperties", false}};
  if (!required.empty()) s["required"] = std::move(required);
  return s;
}

json one_of_required(const char* a, const char* b) {
  return json{{"anyOf", json::array({json{{"required", json::array({a})}}, json{{"required", json::array({b})}}})}};
}

std::vector<ToolDescriptor> build_descriptors() {
  std::vector<ToolDescriptor> d;

  json compile = object_schema({{"source", str("Complete contents of a .v file")},
                                {"path", str("Path of a .v file to compile instead of `source`")},
                                {"timeout", json{{"type", "integer"}, {"minimum", 1},
                                                 {"description", "Seconds before the compilation is abandoned"}}}});
  compile["anyOf"] = one_of_required("source", "path")["anyOf"];
  d.push_back({"rocq_compile",
               "Compile a whole .v file. Returns structured diagnostics and a report with the offending source "
               "lines and caret underlines.",
               compile});

  json verify = object_schema({{"candidate", str("Candidate proof file contents")},
                               {"candidate_path", str("Path of the candidate proof file")},
                               {"stub", str("Problem file whose theorem is closed by Admitted")},
                               {"stub_path", str("Path of the problem file")},
                               {"theorem_name", str("Theorem to prove; defaults to the stub's admitted theorem")}});
  verify["allOf"] = json::array({one_of_required("candidate", "candidate_path"), one_of_required("stub", "stub_path")});
  d.push_back({"rocq_verify",
               "Check a candidate proof against the original problem statement. The candidate is compiled inside a "
               "module and must discharge the untouched statement; Admitted proofs and axioms outside the whitelist "
               "are rejected.",
               verify});

  json autosolve = object_schema({{"stub", str("Problem file whose theorem is closed by Admitted")},
                                  {"stub_path", str("Path of the problem file")},
                                  {"theorem_name", str("Theorem to attack; defaults to the stub's admitted theorem")}});
  autosolve["anyOf"] = one_of_required("stub", "stub_path")["anyOf"];
  d.push_back({"rocq_auto_solve",
               "Try the standard automation tactics (reflexivity, lia, lra, ring, field, auto, ...) on a theorem "
               "before attempting a manual proof.",
               autosolve});

  d.push_back({"rocq_query",
               "Run a Search, Check, Print or About command, inside a session or against a file's context.",
               object_schema({{"kind", str("One of Search, Check, Print, About")},
                              {"argument", json{{"type", "string"}, {"minLength", 1},
                                                {"description", "Command argument, e.g. a term or a search pattern"}}},
                              {"session_id", str("Run inside this interactive session")},
                              {"path", str("File whose definitions and imports form the query context")}},
                             json::array({"kind", "argument"}))});

  d.push_back({"rocq_step",
               "Interactive proving: start a session on a theorem, run one tactic, show the goals, or close it.",
               object_schema({{"action", json{{"type", "string"},
                                              {"enum", json::array({"start", "step", "goals", "close"})},
                                              {"description", "What to do"}}},
                              {"session_id", str("Session to act on (step, goals, close)")},
                              {"path", str("File containing the theorem (start)")},
                              {"theorem", str("Theorem to prove (start)")},
                              {"tactic", str("Tactic to run (step)")}},
                             json::array({"action"}))});

  d.push_back({"rocq_step_multi",
               "Try up to 20 tactics against the current goal of a session. Each runs from the same state and the "
               "session does not advance.",
               object_schema({{"session_id", str("Session to test against")},
                              {"tactics", json{{"type", "array"},
                                               {"items", json{{"type", "string"}}},
                                               {"description", "Tactics to try, at most 20"}}}},
                             json::array({"session_id", "tactics"}))});

  d.push_back({"rocq_toc", "List the theorems, lemmas, definitions, modules and sections of a file with their lines.",
               object_schema({{"path", str("Path of a .v file")}}, json::array({"path"}))});

  d.push_back({"rocq_notations",
               "Show every interpretation of a notation symbol together with its scope, e.g. `+` in nat_scope and "
               "Z_scope.",
               object_schema({{"token", json{{"type", "string"}, {"minLength", 1},
                                             {"description", "Notation symbol or pattern, e.g. \"+\" or \"x + y\""}}},
                              {"session_id", str("Resolve inside this interactive session")},
                              {"path", str("File whose imports and open scopes form the context")}},
                             json::array({"token"}))});
  return d;
}

const ToolDescriptor* find_tool(const std::string& name) {
  for (const auto& t : tool_descriptors()) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

ToolResult success(json payload, std::string human) { return ToolResult{true, std::move(payload), std::nullopt, std::move(human)}; }

ToolResult failure(std::string kind, json payload, std::string human) {
  return ToolResult{false, std::move(payload), std::move(kind), std::move(human)};
}

std::optional<std::string> opt_string(const json& args, const char* key) {
  if (args.contains(key)) return args[key].get<std::string>();
  return std::nullopt;
}

std::string text_or_file(const json& args, const char* inline_key, const char* path_key) {
  if (auto s = opt_string(args, inline_key)) return *s;
  return text::read_file(args.at(path_key).get<std::string>());
}

std::string render_goals(const backend::GoalState& gs) {
  if (gs.goals.empty()) return "No more goals.\n";
  std::string out;
  for (std::size_t i = 0; i < gs.goals.size(); ++i) {
    out += "Goal " + std::to_string(i + 1) + "/" + std::to_string(gs.goals.size()) + ":\n";
    for (const auto& h : gs.goals[i].hypotheses) out += "  " + h + "\n";
    out += "  ============================\n  " + gs.goals[i].conclusion + "\n";
  }
  return out;
}

std::string render_verdict(const verify::VerifyVerdict& v) {
  std::string out = std::string("verdict: ") + (v.accepted ? "accepted" : "rejected") + "\n";
  out += "phase: " + std::string(to_string(v.phase)) + "\n";
  out += "axioms:";
  if (v.axioms_used.empty()) out += " none";
  for (const auto& a : v.axioms_used) out += " " + a;
  out += "\n";
  if (!v.violations.empty()) {
    out += "violations:\n";
    for (const auto& x : v.violations) out += "  " + std::string(to_string(x.kind)) + ": " + x.detail + "\n";
  }
  if (v.report && !v.report->success) out += "\n" + v.report->human_text;
  return out;
}

std::string render_step(const interactive::StepResult& r) {
  std::string out = r.tactic + ": " + std::string(to_string(r.outcome)) + "\n";
  if (!r.message.empty()) out += r.message + "\n";
  if (r.goals_after) out += render_goals(*r.goals_after);
  return out;
}

ToolResult compile_tool(const Resources& res, const json& args) {
  const std::string source = text_or_file(args, "source", "path");
  std::string display = "input.v";
  if (auto p = opt_string(args, "path")) display = std::filesystem::path(*p).filename().string();
  backend::CompileOptions opts;
  if (args.contains("timeout")) opts.timeout = std::chrono::seconds(args["timeout"].get<long>());
  auto report = diagnostics::compile_and_report(*res.backend, source, display, opts, res.rules);
  json payload = report;
  if (report.success) return success(std::move(payload), report.human_text);
  return failure(report.raw.timed_out ? "Timeout" : "CompileFailed", std::move(payload), report.human_text);
}

ToolResult verify_tool(const Resources& res, const json& args) {
  const std::string candidate = text_or_file(args, "candidate", "candidate_path");
  const auto stub = verify::CanonicalStub::from_source(text_or_file(args, "stub", "stub_path"),
                                                       opt_string(args, "theorem_name"));
  verify::VerifyOptions opts;
  opts.rules = &res.rules;
  auto verdict = verify::verify(*res.backend, candidate, stub, res.whitelist, opts);
  json payload = verdict;
  if (verdict.accepted) return success(std::move(payload), render_verdict(verdict));
  return failure("Rejected", std::move(payload), render_verdict(verdict));
}

ToolResult auto_solve_tool(const Resources& res, const json& args) {
  const auto stub = verify::CanonicalStub::from_source(text_or_file(args, "stub", "stub_path"),
                                                       opt_string(args, "theorem_name"));
  auto result = automation::auto_solve(*res.backend, stub, res.battery, res.rules);
  std::string human = result.solved ? "solved by `" + *result.winning_tactic + "`" : std::string("not solved");
  human += " after " + std::to_string(result.attempts.size()) + " attempt(s)\n";
  for (const auto& a : result.attempts) {
    human += "  " + a.tactic + ": " + std::string(to_string(a.outcome)) + " (" + std::to_string(a.duration_ms) + " ms)\n";
  }
  json payload = result;
  if (result.solved) return success(std::move(payload), human);
  return failure("Unsolved", std::move(payload), human);
}

ToolResult query_tool(interactive::SessionManager& sessions, const json& args) {
  const auto kind = interactive::parse_query_kind(args["kind"].get<std::string>());
  std::optional<std::filesystem::path> path;
  if (auto p = opt_string(args, "path")) path = *p;
  auto output = sessions.query(kind, args["argument"].get<std::string>(), opt_string(args, "session_id"), path);
  json payload{{"kind", to_string(kind)}, {"argument", args["argument"]}, {"output", output}};
  return success(std::move(payload), output + "\n");
}

ToolResult step_tool(const Resources& res, interactive::SessionManager& sessions, const json& args) {
  const std::string action = args["action"].get<std::string>();
  auto need = [&](const char* key) {
    auto v = opt_string(args, key);
    if (!v) raise(ErrorKind::InvalidArgument, "action " + action + " needs `" + key + "`");
    return *v;
  };
  if (action != "close" && !res.backend->capabilities().has_interactive) {
    raise(ErrorKind::BackendUnavailable, "no interactive engine configured");
  }
  if (action == "start") {
    const std::string path = need("path");
    if (!std::filesystem::exists(path)) raise(ErrorKind::FileNotFound, "cannot read " + path);
    auto [handle, goals] = sessions.start_session(path, need("theorem"));
    json payload{{"session", handle}, {"goals", goals}};
    return success(std::move(payload), "session " + handle.session_id + " started\n" + render_goals(goals));
  }
  if (action == "step") {
    auto r = sessions.step(need("session_id"), need("tactic"));
    json payload = r;
    if (r.outcome == interactive::StepOutcome::Failed) return failure("TacticFailed", std::move(payload), render_step(r));
    return success(std::move(payload), render_step(r));
  }
  if (action == "goals") {
    auto goals = sessions.current_goals(need("session_id"));
    json payload{{"goals", goals}};
    return success(std::move(payload), render_goals(goals));
  }
  const std::string id = need("session_id");
  sessions.close_session(id);
  return success(json{{"session_id", id}, {"closed", true}}, "session " + id + " closed\n");
}

ToolResult step_multi_tool(const Resources& res, interactive::SessionManager& sessions, const json& args) {
  if (!res.backend->capabilities().has_interactive) raise(ErrorKind::BackendUnavailable, "no interactive engine configured");
  auto results = sessions.step_multi(args["session_id"].get<std::string>(), args["tactics"].get<std::vector<std::string>>());
  std::string human;
  for (std::size_t i = 0; i < results.size(); ++i) human += "[" + std::to_string(i + 1) + "] " + render_step(results[i]);
  return success(json{{"results", results}}, human);
}

ToolResult toc_tool(const json& args) {
  auto entries = interactive::toc(args["path"].get<std::string>());
  std::string human;
  for (const auto& e : entries) {
    human += std::string(static_cast<std::size_t>(e.depth) * 2, ' ') + std::string(to_string(e.kind)) + " " + e.name +
             " (line " + std::to_string(e.line) + ")\n";
  }
  if (entries.empty()) human = "(no declarations)\n";
  return success(json{{"entries", entries}}, human);
}

ToolResult notations_tool(interactive::SessionManager& sessions, const json& args) {
  std::optional<std::filesystem::path> path;
  if (auto p = opt_string(args, "path")) path = *p;
  auto entries = sessions.resolve_notation(args["token"].get<std::string>(), opt_string(args, "session_id"), path);
  std::string human;
  for (const auto& e : entries) {
    human += e.notation + " := " + e.interpretation;
    if (!e.scope.empty()) human += " : " + e.scope;
    if (e.is_default) human += " (default interpretation)";
    human += "\n";
  }
  return success(json{{"token", args["token"]}, {"entries", entries}}, human);
}

json error_response(const json& id, int code, const std::string& message) {
  return json{{"jsonrpc", "2.0"}, {"id", id}, {"error", json{{"code", code}, {"message", message}}}};
}

json result_response(const json& id, json result) {
  return json{{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
}

}  // namespace

const std::vector<ToolDescriptor>& tool_descriptors() {
  static const std::vector<ToolDescriptor> d = build_descriptors();
  return d;
}

json call_result_json(const ToolResult& r) {
  json structured{{"ok", r.ok}, {"payload", r.payload}};
  if (r.error_kind) structured["error_kind"] = *r.error_kind;
  return json{{"content", json::array({json{{"type", "text"}, {"text", r.human_text}}})},
              {"isError", !r.ok},
              {"structuredContent", std::move(structured)}};
}

ToolServer::ToolServer(const Resources& resources) : res_(resources), sessions_(*resources.backend) {}

ToolResult ToolServer::dispatch(const std::string& name, const json& arguments) {
  const ToolDescriptor* tool = find_tool(name);
  if (!tool) raise(ErrorKind::InvalidArgument, "unknown tool: " + name);
  if (auto problem = validate(arguments, tool->input_schema)) raise(ErrorKind::SchemaViolation, *problem);
  try {
    if (name == "rocq_compile") return compile_tool(res_, arguments);
    if (name == "rocq_verify") return verify_tool(res_, arguments);
    if (name == "rocq_auto_solve") return auto_solve_tool(res_, arguments);
    if (name == "rocq_query") return query_tool(sessions_, arguments);
    if (name == "rocq_step") return step_tool(res_, sessions_, arguments);
    if (name == "rocq_step_multi") return step_multi_tool(res_, sessions_, arguments);
    if (name == "rocq_toc") return toc_tool(arguments);
    return notations_tool(sessions_, arguments);
  } catch (const Error& e) {
    const std::string kind(to_string(e.kind()));
    return failure(kind, json{{"message", e.what()}}, kind + ": " + e.what() + "\n");
  }
}

json ToolServer::handle_request(const json& request) {
  const json id = request.contains("id") ? request["id"] : json();
  const std::string method = request["method"].get<std::string>();
  const json params = request.value("params", json::object());

  if (method == "initialize") {
    std::string version = kSupportedProtocolVersions[std::size(kSupportedProtocolVersions) - 1];
    if (params.is_object() && params.contains("protocolVersion") && params["protocolVersion"].is_string()) {
      for (const char* v : kSupportedProtocolVersions) {
        if (params["protocolVersion"] == v) version = v;
      }
    }
    return result_response(id, json{{"protocolVersion", version},
                                    {"capabilities", json{{"tools", json{{"listChanged", false}}}}},
                                    {"serverInfo", json{{"name", "rocq-tools"}, {"version", "0.1.0"}}}});
  }
  if (method == "ping") return result_response(id, json::object());
  if (method == "tools/list") {
    json tools = json::array();
    for (const auto& t : tool_descriptors()) {
      tools.push_back(json{{"name", t.name}, {"description", t.description}, {"inputSchema", t.input_schema}});
    }
    return result_response(id, json{{"tools", std::move(tools)}});
  }
  if (method == "tools/call") {
    if (!params.is_object() || !params.contains("name") || !params["name"].is_string()) {
      return error_response(id, rpc::kInvalidParams, "tools/call needs a string `name`");
    }
    const std::string name = params["name"].get<std::string>();
    if (!find_tool(name)) return error_response(id, rpc::kMethodNotFound, "unknown tool: " + name);
    const json args = params.value("arguments", json::object());
    try {
      return result_response(id, call_result_json(dispatch(name, args)));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SchemaViolation) return error_response(id, rpc::kInvalidParams, e.what());
      return error_response(id, rpc::kInternalError, e.what());
    } catch (const std::exception& e) {
      return error_response(id, rpc::kInternalError, e.what());
    }
  }
  return error_response(id, rpc::kMethodNotFound, "method not found: " + method);
}

std::optional<std::string> ToolServer::handle_message(const std::string& message) {
  json request = json::parse(message, nullptr, false);
  if (request.is_discarded()) return error_response(nullptr, rpc::kParseError, "Parse error").dump();
  if (!request.is_object()) return error_response(nullptr, rpc::kInvalidRequest, "request must be a JSON object").dump();

  const bool has_id = request.contains("id");
  json id = has_id ? request["id"] : json();
  if (has_id && !(id.is_string() || id.is_number_integer() || id.is_null())) {
    return error_response(nullptr, rpc::kInvalidRequest, "id must be a string or an integer").dump();
  }
  if (request.value("jsonrpc", json()) != "2.0" || !request.contains("method") || !request["method"].is_string()) {
    return error_response(id, rpc::kInvalidRequest, "not a JSON-RPC 2.0 request").dump();
  }
  if (!has_id) return std::nullopt;  // notification
  try {
    return handle_request(request).dump();
  } catch (const std::exception& e) {
    return error_response(id, rpc::kInternalError, e.what()).dump();
  }
}

namespace {

// Fixed set of workers, each with its own FIFO; requests naming a session
// always land on the same worker so they keep their arrival order.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t n) : queues_(n) {
    for (std::size_t i = 0; i < n; ++i) threads_.emplace_back([this, i] { run(i); });
  }
  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      closing_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void submit(std::size_t worker, std::function<void()> job) {
    {
      std::lock_guard lock(mu_);
      queues_[worker % queues_.size()].push_back(std::move(job));
    }
    cv_.notify_all();
  }

  std::size_t size() const { return queues_.size(); }

 private:
  void run(std::size_t i) {
    while (true) {
      std::function<void()> job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return closing_ || !queues_[i].empty(); });
        if (queues_[i].empty()) return;
        job = std::move(queues_[i].front());
        queues_[i].pop_front();
      }
      job();
    }
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::deque<std::function<void()>>> queues_;
  std::vector<std::thread> threads_;
  bool closing_ = false;
};

std::optional<std::string> session_key(const std::string& message) {
  json request = json::parse(message, nullptr, false);
  if (!request.is_object()) return std::nullopt;
  const json& params = request.contains("params") ? request["params"] : json();
  if (!params.is_object() || !params.contains("arguments") || !params["arguments"].is_object()) return std::nullopt;
  const json& args = params["arguments"];
  if (args.contains("session_id") && args["session_id"].is_string()) return args["session_id"].get<std::string>();
  return std::nullopt;
}

}  // namespace

int ToolServer::serve(std::istream& in, std::ostream& out, framing::Framing framing, std::size_t concurrency) {
  std::mutex out_mu;
  bool failed = false;
  auto emit = [&](const std::string& response) {
    std::lock_guard lock(out_mu);
    out << framing::encode(response, framing);
    out.flush();
    if (!out) failed = true;
  };

  if (concurrency <= 1) {
    while (auto message = framing::read_message(in, framing)) {
      if (auto response = handle_message(*message)) emit(*response);
      if (failed) return 1;
    }
    return 0;
  }

  {
    WorkerPool pool(concurrency);
    std::size_t next = 0;
    while (auto message = framing::read_message(in, framing)) {
      std::size_t worker;
      if (auto key = session_key(*message)) worker = std::hash<std::string>{}(*key) % pool.size();
      else worker = next++ % pool.size();
      pool.submit(worker, [this, msg = std::move(*message), &emit] {
        if (auto response = handle_message(msg)) emit(*response);
      });
    }
  }
  return failed ? 1 : 0;
}

}  // namespace rocq::server
