#include "rocq/analytics/reference_fixture.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>

#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"

namespace rocq::analytics {

namespace {

// ---- the encoded run ----

// 2025-12-08T09:00:00Z
constexpr Millis kStart = 1765184400000;

struct Window {
  int from_min;
  int to_min;
};
using Windows = std::vector<Window>;

// Eight active stretches; everything between them is idle.
const Windows kActive = {{0, 330},     {510, 660},   {840, 960},   {1110, 1230},
                         {1650, 1740}, {2100, 2172}, {2712, 2832}, {3036, 3096}};

struct ProblemShape {
  const char* label;
  const char* group;
  int weight_permille;  // share of the group's tokens
  std::optional<int> solved_min;
  Windows windows;
  int compile_attempts;
  int compile_successes;
  int step_calls;
};

const Windows kUnsolvedWindows = {{510, 660}, {840, 960}, {1110, 1230}, {1650, 1740},
                                  {2100, 2172}, {2712, 2832}, {3036, 3096}};

const std::vector<ProblemShape>& problems() {
  static const std::vector<ProblemShape> p = {
      {"A1", "Easy", 200, 51, {{0, 51}}, 100, 46, 0},
      {"A2", "Easy", 250, 93, {{0, 93}}, 150, 75, 0},
      {"A3", "Easy", 200, 67, {{0, 67}}, 100, 58, 0},
      {"B4", "Easy", 350, 226, {{0, 100}, {216, 226}}, 100, 53, 0},
      {"A4", "Medium", 300, 298, {{226, 298}}, 250, 123, 0},
      {"B1", "Medium", 20, 108, {{0, 108}}, 50, 26, 0},
      {"B2", "Medium", 300, 313, {{226, 313}}, 250, 120, 0},
      {"B3", "Medium", 380, 921, {{313, 330}, {510, 560}, {900, 921}}, 250, 125, 5},
      {"A6", "Hard", 350, 1196, {{298, 330}, {510, 660}, {840, 960}, {1110, 1196}}, 300, 153, 5},
      {"B5", "Hard", 650, 2761, {{1196, 1230}, {1650, 1740}, {2100, 2172}, {2712, 2761}}, 500, 250, 150},
      {"A5", "Unsolved", 450, std::nullopt, kUnsolvedWindows, 500, 240, 150},
      {"B6", "Unsolved", 550, std::nullopt, kUnsolvedWindows, 550, 264, 140},
  };
  return p;
}

const std::vector<std::pair<const char*, std::int64_t>> kGroupEstimates = {
    {"Easy", 100}, {"Medium", 400}, {"Hard", 600}, {"Unsolved", 800}};

struct RoleBudget {
  Role role;
  int agents;
  std::int64_t tokens;
  int calls;
};
const std::vector<RoleBudget> kRoles = {
    {Role::LemmaProver, 55, 738'000'000, 4845}, {Role::BugFixer, 36, 538'000'000, 3409},
    {Role::General, 21, 253'000'000, 1588},     {Role::Verifier, 15, 65'000'000, 639},
    {Role::ProofCompleter, 13, 185'000'000, 1257}, {Role::Compiler, 1, 1'000'000, 14},
};

// Whole-run token volume by category.
const TokenCounts kCategoryTotals{200'000, 16'226'667, 71'733'333, 1'809'333'333};

constexpr int kOrchestratorCalls = 675;
constexpr int kVerifyCalls = 120;
constexpr int kQueryCalls = 80;
constexpr int kAutoSolveCalls = 20;
constexpr int kFillChunksPerProblem = 25;
constexpr double kSubagentCompileCap = 0.45;

const char* const kOrchestrator = "orchestrator";

// ---- helpers ----

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double unit() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(g_() % n); }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 g_;
};

Millis length(const Windows& w) {
  Millis total = 0;
  for (const auto& x : w) total += Millis{x.to_min - x.from_min} * kMinute;
  return total;
}

// Offset into the concatenated windows -> time since start.
Millis place(const Windows& w, Millis offset) {
  for (const auto& x : w) {
    const Millis len = Millis{x.to_min - x.from_min} * kMinute;
    if (offset < len) return Millis{x.from_min} * kMinute + offset;
    offset -= len;
  }
  return Millis{w.back().to_min} * kMinute;
}

// n increasing instants spread over the windows, one per equal slice.
std::vector<Millis> spread(const Windows& w, std::size_t n, Rng& rng) {
  std::vector<Millis> out;
  const double len = static_cast<double>(length(w));
  for (std::size_t k = 0; k < n; ++k) {
    auto offset = static_cast<Millis>(len * (static_cast<double>(k) + rng.unit()) / static_cast<double>(n));
    out.push_back(kStart + place(w, offset));
  }
  return out;
}

// Largest-remainder split of `total` in proportion to `weights`.
std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<std::int64_t>& weights) {
  __int128 wsum = 0;
  for (auto w : weights) wsum += w;
  std::vector<std::int64_t> out(weights.size());
  std::vector<std::pair<__int128, std::size_t>> rem;
  std::int64_t given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const __int128 num = static_cast<__int128>(total) * weights[i];
    out[i] = static_cast<std::int64_t>(num / wsum);
    given += out[i];
    rem.push_back({num % wsum, i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; given < total; ++k, ++given) ++out[rem[k].second];
  return out;
}

std::vector<std::int64_t> even_split(std::int64_t total, std::size_t parts) {
  return apportion(total, std::vector<std::int64_t>(parts, 1));
}

std::string prompt_for(Role role, const std::string& problem, std::size_t variant) {
  const std::string file = problem + ".v";
  switch (role) {
    case Role::LemmaProver: {
      static const char* forms[] = {
          "Prove the following lemma for Putnam %P: the partial sums are bounded by the telescoping series. "
          "Strategy: split the range at the midpoint and compare term by term.",
          "Your task: prove the helper lemma `%P_key_bound` stated at the top of %F. Work by strong induction "
          "on n and keep the statement unchanged.",
          "State and prove a lemma that the polynomial has no real root in [0, 1] for problem %P. Hint: use the "
          "intermediate value theorem on the derivative.",
      };
      std::string s = forms[variant % 3];
      for (auto pos = s.find("%P"); pos != std::string::npos; pos = s.find("%P")) s.replace(pos, 2, problem);
      for (auto pos = s.find("%F"); pos != std::string::npos; pos = s.find("%F")) s.replace(pos, 2, file);
      return s;
    }
    case Role::BugFixer:
      if (variant % 2) return file + " does not compile after the last edit. Fix the errors and rerun the compiler.";
      return "Fix the compilation error at line " + std::to_string(40 + variant * 7) + " of " + file +
             ": the rewrite leaves a type mismatch between nat and Z.";
    case Role::General:
      if (variant % 2) return "Work on Putnam " + problem + ". Read the formal statement, sketch a plan, and report back.";
      return "Investigate problem " + problem + " and summarize which approaches look promising.";
    case Role::Verifier:
      if (variant % 2) return "Run Print Assumptions on the main theorem of " + file + " and report every axiom used.";
      return "Verify that the final proof of " + problem + " is axiom-free and remove any unnecessary Admitted.";
    case Role::ProofCompleter:
      if (variant % 2) return "The skeleton in " + file + " has the main structure in place; finish the proof.";
      return "Complete the proof of " + problem + ": fill in the remaining admits in the case analysis.";
    case Role::Compiler:
      return "Compile all proof files for " + problem + " and list the ones that build cleanly.";
  }
  return {};
}

struct Agent {
  std::string id;
  Role role = Role::General;
  std::size_t problem = 0;
  std::int64_t tokens = 0;
  std::int64_t calls = 0;
  std::size_t variant = 0;
};

AgentEvent make_event(Millis t, const std::string& agent, EventKind kind, std::optional<std::string> problem) {
  AgentEvent e;
  e.timestamp = t;
  e.agent_id = agent;
  e.event_kind = kind;
  e.problem = std::move(problem);
  return e;
}

}  // namespace

std::vector<AgentEvent> Fixture::all_events() const {
  std::vector<AgentEvent> out;
  for (const auto& f : files) out.insert(out.end(), f.events.begin(), f.events.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return out;
}

Fixture build_reference_fixture(std::uint64_t seed) {
  Rng rng(seed);
  const auto& probs = problems();
  const std::int64_t total_tokens = kCategoryTotals.total();

  // Token targets: groups first, then problems inside each group.
  std::vector<std::int64_t> est;
  for (const auto& g : kGroupEstimates) est.push_back(g.second);
  const auto group_tokens = apportion(total_tokens, est);
  std::vector<std::int64_t> target(probs.size());
  for (std::size_t g = 0; g < kGroupEstimates.size(); ++g) {
    std::vector<std::size_t> members;
    std::vector<std::int64_t> weights;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (std::string_view(probs[i].group) == kGroupEstimates[g].first) {
        members.push_back(i);
        weights.push_back(probs[i].weight_permille);
      }
    }
    const auto split = apportion(group_tokens[g], weights);
    for (std::size_t k = 0; k < members.size(); ++k) target[members[k]] = split[k];
  }

  // Agents, shuffled so ids do not give the role away.
  std::vector<Agent> agents;
  for (const auto& rb : kRoles) {
    const auto toks = even_split(rb.tokens, rb.agents);
    const auto calls = even_split(rb.calls, rb.agents);
    for (int i = 0; i < rb.agents; ++i) {
      Agent a;
      a.role = rb.role;
      a.tokens = toks[i];
      a.calls = calls[i];
      a.variant = static_cast<std::size_t>(i);
      agents.push_back(a);
    }
  }
  rng.shuffle(agents);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "agent-%03zu", i + 1);
    agents[i].id = buf;
  }

  // Biggest agents first, each to the problem with the most room left.
  std::vector<std::int64_t> assigned(probs.size(), 0);
  std::vector<std::size_t> order(agents.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return agents[a].tokens > agents[b].tokens; });
  for (auto idx : order) {
    std::optional<std::size_t> best;
    for (std::size_t p = 0; p < probs.size(); ++p) {
      const auto room = target[p] - assigned[p];
      if (room < agents[idx].tokens) continue;
      if (!best || room > target[*best] - assigned[*best]) best = p;
    }
    if (!best) raise(ErrorKind::InvalidArgument, "fixture layout: no problem can take " + agents[idx].id);
    agents[idx].problem = *best;
    assigned[*best] += agents[idx].tokens;
  }

  std::map<std::string, std::vector<AgentEvent>> streams;
  auto& orch = streams[kOrchestrator];

  // Subagent activity: one call plus one token record per slot.
  struct Slot {
    std::string agent;
    std::size_t event_index;  // the ToolCall inside that agent's stream
  };
  std::vector<std::vector<Slot>> slots(probs.size());
  std::vector<std::pair<std::string, std::size_t>> token_records;  // canonical order for the category split
  std::vector<std::int64_t> token_amounts;

  for (const Agent& a : agents) {
    const auto& prob = probs[a.problem];
    auto& s = streams["agents/" + a.id];
    const auto times = spread(prob.windows, static_cast<std::size_t>(a.calls), rng);
    const auto chunks = even_split(a.tokens, static_cast<std::size_t>(a.calls));

    AgentEvent spawn = make_event(times.front(), a.id, EventKind::AgentSpawn, prob.label);
    spawn.parent_id = kOrchestrator;
    spawn.initial_prompt = prompt_for(a.role, prob.label, a.variant);
    if (classify_role(*spawn.initial_prompt) != a.role) {
      raise(ErrorKind::InvalidArgument, "fixture prompt is not classified as " + std::string(to_string(a.role)) +
                                            ": " + *spawn.initial_prompt);
    }
    s.push_back(spawn);

    AgentEvent task = make_event(times.front(), kOrchestrator, EventKind::ToolCall, prob.label);
    task.tool_name = "Task";
    task.success = true;
    orch.push_back(task);

    for (std::size_t k = 0; k < times.size(); ++k) {
      AgentEvent call = make_event(times[k], a.id, EventKind::ToolCall, prob.label);
      call.success = true;
      slots[a.problem].push_back({"agents/" + a.id, s.size()});
      s.push_back(call);
      AgentEvent use = make_event(times[k], a.id, EventKind::TokenUsage, prob.label);
      use.tokens = TokenCounts{};
      token_records.push_back({"agents/" + a.id, s.size()});
      token_amounts.push_back(chunks[k]);
      s.push_back(use);
    }
  }

  // Tool mix per problem.
  std::vector<std::int64_t> slot_weights;
  for (const auto& s : slots) slot_weights.push_back(static_cast<std::int64_t>(s.size()));
  const auto verify_q = apportion(kVerifyCalls, slot_weights);
  const auto query_q = apportion(kQueryCalls, slot_weights);
  const auto auto_q = apportion(kAutoSolveCalls, slot_weights);

  static const char* const kOtherTools[] = {"Bash", "Read", "Edit", "Write", "Grep"};
  std::vector<int> deficit(probs.size(), 0);
  for (std::size_t p = 0; p < probs.size(); ++p) {
    auto& sl = slots[p];
    rng.shuffle(sl);
    const int cap = static_cast<int>(kSubagentCompileCap * static_cast<double>(sl.size()));
    const int sub_compile = std::min(probs[p].compile_attempts, cap);
    deficit[p] = probs[p].compile_attempts - sub_compile;
    std::vector<std::pair<const char*, std::int64_t>> plan = {{"rocq_compile", sub_compile},
                                                              {"rocq_step", probs[p].step_calls},
                                                              {"rocq_verify", verify_q[p]},
                                                              {"rocq_query", query_q[p]},
                                                              {"rocq_auto_solve", auto_q[p]}};
    std::size_t k = 0;
    for (const auto& [tool, n] : plan) {
      for (std::int64_t j = 0; j < n; ++j, ++k) {
        if (k >= sl.size()) raise(ErrorKind::InvalidArgument, std::string("fixture layout: too few calls on ") + probs[p].label);
        auto& e = streams[sl[k].agent][sl[k].event_index];
        e.tool_name = tool;
        if (std::string_view(tool) == "rocq_step") e.success = rng.unit() < 0.7;
        if (std::string_view(tool) == "rocq_auto_solve") e.success = false;
      }
    }
    for (; k < sl.size(); ++k) streams[sl[k].agent][sl[k].event_index].tool_name = kOtherTools[rng.below(5)];
  }

  // Orchestrator: compile calls the subagents could not absorb, edge markers,
  // housekeeping, solves, and its own token use.
  int orch_calls = static_cast<int>(agents.size());
  for (std::size_t p = 0; p < probs.size(); ++p) {
    for (Millis t : spread(probs[p].windows, static_cast<std::size_t>(deficit[p]), rng)) {
      AgentEvent e = make_event(t, kOrchestrator, EventKind::ToolCall, probs[p].label);
      e.tool_name = "rocq_compile";
      orch.push_back(e);
      ++orch_calls;
    }
  }
  for (const auto& w : kActive) {
    for (int m : {w.from_min, w.to_min}) {
      AgentEvent e = make_event(kStart + Millis{m} * kMinute, kOrchestrator, EventKind::ToolCall, std::nullopt);
      e.tool_name = "Bash";
      e.success = true;
      orch.push_back(e);
      ++orch_calls;
    }
  }
  const int housekeeping = kOrchestratorCalls - orch_calls;
  if (housekeeping < 60) raise(ErrorKind::InvalidArgument, "fixture layout: orchestrator call budget exhausted");
  static const char* const kHousekeeping[] = {"Read", "Bash", "TodoWrite"};
  {
    std::size_t k = 0;
    for (Millis t : spread(kActive, static_cast<std::size_t>(housekeeping), rng)) {
      AgentEvent e = make_event(t, kOrchestrator, EventKind::ToolCall, std::nullopt);
      e.tool_name = kHousekeeping[k++ % 3];
      e.success = true;
      orch.push_back(e);
    }
  }
  for (const auto& p : probs) {
    if (p.solved_min) {
      orch.push_back(make_event(kStart + Millis{*p.solved_min} * kMinute, kOrchestrator, EventKind::ProblemSolved, p.label));
    }
  }
  for (std::size_t p = 0; p < probs.size(); ++p) {
    const auto chunks = even_split(target[p] - assigned[p], kFillChunksPerProblem);
    const auto times = spread(probs[p].windows, kFillChunksPerProblem, rng);
    for (std::size_t k = 0; k < chunks.size(); ++k) {
      AgentEvent e = make_event(times[k], kOrchestrator, EventKind::TokenUsage, probs[p].label);
      e.tokens = TokenCounts{};
      token_records.push_back({kOrchestrator, orch.size()});
      token_amounts.push_back(chunks[k]);
      orch.push_back(e);
    }
  }

  // Category split with exact totals: running floors for three categories,
  // cache reads take the rest of each record.
  {
    const __int128 T = total_tokens;
    __int128 cum = 0;
    std::int64_t given_in = 0, given_out = 0, given_cc = 0;
    for (std::size_t r = 0; r < token_records.size(); ++r) {
      cum += token_amounts[r];
      const auto in = static_cast<std::int64_t>(cum * kCategoryTotals.input / T);
      const auto out = static_cast<std::int64_t>(cum * kCategoryTotals.output / T);
      const auto cc = static_cast<std::int64_t>(cum * kCategoryTotals.cache_creation / T);
      TokenCounts& t = *streams[token_records[r].first][token_records[r].second].tokens;
      t.input = in - given_in;
      t.output = out - given_out;
      t.cache_creation = cc - given_cc;
      t.cache_read = token_amounts[r] - t.input - t.output - t.cache_creation;
      given_in = in;
      given_out = out;
      given_cc = cc;
    }
  }

  // Which compile attempts succeeded, per problem.
  {
    std::vector<std::vector<AgentEvent*>> compiles(probs.size());
    std::map<std::string, std::size_t> index;
    for (std::size_t p = 0; p < probs.size(); ++p) index[probs[p].label] = p;
    for (auto& [name, evs] : streams) {
      for (auto& e : evs) {
        if (e.event_kind == EventKind::ToolCall && e.tool_name == "rocq_compile") compiles[index.at(*e.problem)].push_back(&e);
      }
    }
    for (std::size_t p = 0; p < probs.size(); ++p) {
      auto& c = compiles[p];
      std::stable_sort(c.begin(), c.end(), [](auto* a, auto* b) { return a->timestamp < b->timestamp; });
      rng.shuffle(c);
      for (std::size_t k = 0; k < c.size(); ++k) c[k]->success = static_cast<int>(k) < probs[p].compile_successes;
    }
  }

  Fixture fx;
  for (auto& [name, evs] : streams) {
    std::stable_sort(evs.begin(), evs.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    fx.files.push_back({name + ".jsonl", std::move(evs)});
  }

  // The shape must come out as designed whatever the seed.
  const auto gaps = detect_gaps(fx.all_events());
  if (gaps.gaps.size() != kActive.size() - 1 || gaps.active_duration != length(kActive) ||
      gaps.wall_clock_duration != Millis{kActive.back().to_min} * kMinute) {
    raise(ErrorKind::InvalidArgument, "fixture layout: activity does not follow the encoded timeline");
  }
  return fx;
}

void write_fixture(const Fixture& fixture, const std::filesystem::path& dir) {
  for (const auto& f : fixture.files) {
    std::string doc;
    for (const auto& e : f.events) doc += event_to_json(e).dump() + "\n";
    const auto path = dir / f.relative_path;
    std::filesystem::create_directories(path.parent_path());
    text::write_file(path, doc);
  }
}

}  // namespace rocq::analytics
