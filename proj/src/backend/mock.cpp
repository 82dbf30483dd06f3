#include "rocq/backend/mock.hpp"

#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"

namespace rocq::backend {

namespace {

std::string state_key(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  return std::to_string(j.get<int>());
}

}  // namespace

std::string MockScript::tactic_key(std::string_view tactic) {
  auto t = text::trim(tactic);
  if (!t.empty() && t.back() == '.') t.remove_suffix(1);
  return text::collapse_whitespace(t);
}

void MockScript::add_compile(std::string_view source, RawCompileResult result) {
  compile_table[source_fingerprint(source)] = std::move(result);
}

MockScript MockScript::from_json(const nlohmann::json& j) {
  MockScript s;
  try {
    if (j.contains("capabilities")) {
      const auto& c = j["capabilities"];
      s.caps.has_compiler = c.value("compiler", true);
      s.caps.has_interactive = s.caps.has_compiler && c.value("interactive", true);
    }
    for (const auto& entry : j.value("compile", nlohmann::json::array())) {
      auto result = entry.get<RawCompileResult>();
      if (entry.contains("fingerprint")) {
        s.compile_table[entry["fingerprint"].get<std::string>()] = result;
      } else {
        s.add_compile(entry.at("source").get<std::string>(), result);
      }
    }
    if (j.contains("engine")) {
      const auto& e = j["engine"];
      // items() keeps a reference, so the looked-up objects need names.
      const auto theorems = e.value("theorems", nlohmann::json::object());
      const auto states = e.value("states", nlohmann::json::object());
      for (const auto& [name, id] : theorems.items()) {
        s.theorems[name] = id.get<int>();
      }
      for (const auto& [id, goals] : states.items()) {
        std::vector<Goal> gs;
        for (const auto& g : goals) {
          gs.push_back(Goal{g.value("hypotheses", std::vector<std::string>{}), g.at("conclusion").get<std::string>()});
        }
        s.states[std::stoi(id)] = std::move(gs);
      }
      for (const auto& st : e.value("steps", nlohmann::json::array())) {
        MockStep step;
        if (st.contains("next")) step.next = st["next"].get<int>();
        step.error = st.value("error", std::string());
        step.crash = st.value("crash", false);
        s.step_table[{state_key(st.at("state")), tactic_key(st.at("tactic").get<std::string>())}] = step;
      }
      for (const auto& c : e.value("commands", nlohmann::json::array())) {
        s.commands[tactic_key(c.at("text").get<std::string>())] =
            MockCommand{c.value("output", std::string()), c.value("error", std::string())};
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    raise(ErrorKind::InvalidConfig, std::string("malformed mock script: ") + ex.what());
  }
  return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  auto doc = nlohmann::json::parse(text::read_file(path), nullptr, false);
  if (doc.is_discarded()) raise(ErrorKind::InvalidConfig, "mock script is not JSON: " + path.string());
  return from_json(doc);
}

MockBackend::MockBackend(MockScript script, std::chrono::seconds default_timeout)
    : script_(std::make_shared<const MockScript>(std::move(script))), timeout_(default_timeout) {}

RawCompileResult MockBackend::compile(std::string_view source, const CompileOptions& options) const {
  if (!script_->caps.has_compiler) raise(ErrorKind::CompilerNotFound, "mock backend has no compiler");
  if (text::trim(source).empty()) raise(ErrorKind::InvalidArgument, "source is empty");
  if (options.timeout && *options.timeout < std::chrono::seconds(1)) {
    raise(ErrorKind::InvalidArgument, "timeout must be at least 1 second");
  }
  auto fp = source_fingerprint(source);
  auto it = script_->compile_table.find(fp);
  if (it == script_->compile_table.end()) {
    raise(ErrorKind::Unscripted, "unscripted compile (fingerprint " + fp + ")");
  }
  return it->second;
}

std::unique_ptr<ProofEngine> MockBackend::open_engine() const {
  if (!script_->caps.has_interactive) raise(ErrorKind::BackendUnavailable, "mock backend has no interactive engine");
  return std::make_unique<MockEngine>(script_);
}

void MockEngine::ensure_alive() const {
  if (!alive_) raise(ErrorKind::EngineCrash, "mock engine crashed earlier");
}

int MockEngine::state_of(std::string_view token) const {
  if (!token.starts_with("m")) raise(ErrorKind::InvalidArgument, "not a mock state token: " + std::string(token));
  return std::stoi(std::string(token.substr(1)));
}

std::string MockEngine::start(const std::filesystem::path&, std::string_view theorem) {
  ensure_alive();
  auto it = script_->theorems.find(std::string(theorem));
  if (it == script_->theorems.end()) {
    raise(ErrorKind::EngineStartFailure, "unscripted theorem: " + std::string(theorem));
  }
  return "m" + std::to_string(it->second);
}

EngineRun MockEngine::run(std::string_view state_token, std::string_view text) {
  ensure_alive();
  const int state = state_of(state_token);
  const auto key = MockScript::tactic_key(text);

  if (auto c = script_->commands.find(key); c != script_->commands.end()) {
    if (!c->second.error.empty()) return EngineRun{false, {}, c->second.error};
    return EngineRun{true, std::string(state_token), c->second.output};
  }

  auto it = script_->step_table.find({std::to_string(state), key});
  if (it == script_->step_table.end()) it = script_->step_table.find({"*", key});
  if (it == script_->step_table.end()) return EngineRun{false, {}, "unscripted tactic: " + key};

  const MockStep& step = it->second;
  if (step.crash) {
    alive_ = false;
    raise(ErrorKind::EngineCrash, "mock engine crashed on: " + key);
  }
  if (!step.error.empty() || !step.next) return EngineRun{false, {}, step.error};
  return EngineRun{true, "m" + std::to_string(*step.next), {}};
}

GoalState MockEngine::goals(std::string_view state_token) {
  ensure_alive();
  const int state = state_of(state_token);
  auto it = script_->states.find(state);
  if (it == script_->states.end()) raise(ErrorKind::InvalidArgument, "unscripted state: " + std::to_string(state));
  return GoalState{it->second, std::string(state_token)};
}

}  // namespace rocq::backend
