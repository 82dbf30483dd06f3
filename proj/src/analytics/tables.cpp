#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "rocq/analytics/analytics.hpp"
#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"
#include "rocq/embedded/problem_groups.hpp"
#include "rocq/embedded/prices.hpp"
#include "rocq/embedded/role_rules.hpp"

namespace rocq::analytics {

// ---- roles ----

std::string_view to_string(Role r) {
  switch (r) {
    case Role::LemmaProver: return "LemmaProver";
    case Role::BugFixer: return "BugFixer";
    case Role::General: return "General";
    case Role::Verifier: return "Verifier";
    case Role::ProofCompleter: return "ProofCompleter";
    case Role::Compiler: return "Compiler";
  }
  return "?";
}

std::optional<Role> role_from_string(std::string_view s) {
  for (Role r : kAllRoles) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

struct RoleRules::Rule {
  Role role;
  std::regex pattern;
};

std::string_view RoleRules::default_text() { return embedded::role_rules; }

const RoleRules& RoleRules::defaults() {
  static const RoleRules rules = parse(default_text());
  return rules;
}

RoleRules RoleRules::parse(std::string_view doc) {
  RoleRules out;
  for (const auto& line : text::data_lines(doc)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) raise(ErrorKind::InvalidConfig, "role rule without a tab: " + line);
    auto role = role_from_string(text::trim(std::string_view(line).substr(0, tab)));
    if (!role) raise(ErrorKind::InvalidConfig, "unknown role in rule: " + line);
    std::string pattern(text::trim(std::string_view(line).substr(tab + 1)));
    try {
      out.rules_.push_back(std::make_shared<Rule>(Rule{*role, std::regex(pattern, std::regex::icase)}));
    } catch (const std::regex_error& e) {
      raise(ErrorKind::InvalidConfig, "bad role pattern `" + pattern + "`: " + e.what());
    }
  }
  return out;
}

RoleRules RoleRules::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) raise(ErrorKind::InvalidConfig, "cannot read " + path.string());
  return parse(text::read_file(path));
}

Role RoleRules::classify(std::string_view prompt) const {
  const std::string p(prompt);
  for (const auto& r : rules_) {
    if (std::regex_search(p, r->pattern)) return r->role;
  }
  return Role::General;
}

Role classify_role(std::string_view initial_prompt, const RoleRules& rules) { return rules.classify(initial_prompt); }

// ---- tool usage ----

std::vector<ToolUsageRow> tool_usage_table(const std::vector<AgentEvent>& events) {
  std::map<std::string, std::int64_t> counts;
  std::int64_t total = 0;
  for (const auto& e : events) {
    if (e.event_kind != EventKind::ToolCall) continue;
    ++counts[*e.tool_name];
    ++total;
  }
  std::vector<ToolUsageRow> rows;
  for (const auto& [tool, n] : counts) rows.push_back({tool, n, static_cast<double>(n) / static_cast<double>(total)});
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.calls > b.calls; });
  return rows;
}

namespace {

std::map<std::string, std::string> spawned_prompts(const std::vector<AgentEvent>& events) {
  std::map<std::string, std::string> out;
  for (const auto& e : events) {
    if (e.event_kind == EventKind::AgentSpawn) out.try_emplace(e.agent_id, e.initial_prompt.value_or(""));
  }
  return out;
}

}  // namespace

CallSplit call_split(const std::vector<AgentEvent>& events) {
  const auto spawned = spawned_prompts(events);
  CallSplit s;
  for (const auto& e : events) {
    if (e.event_kind != EventKind::ToolCall) continue;
    ++s.total;
    if (spawned.count(e.agent_id)) ++s.by_spawned_agents;
    else ++s.other;
    if (e.tool_name->rfind("rocq_", 0) == 0) ++s.mcp;
  }
  return s;
}

RoleTable role_table(const std::vector<AgentEvent>& events, const RoleRules& rules) {
  std::map<std::string, Role> role_of;
  for (const auto& [agent, prompt] : spawned_prompts(events)) role_of[agent] = rules.classify(prompt);

  std::map<Role, RoleRow> by_role;
  for (const auto& [agent, role] : role_of) {
    auto& row = by_role[role];
    row.role = role;
    ++row.agents;
  }
  for (const auto& e : events) {
    auto it = role_of.find(e.agent_id);
    if (it == role_of.end()) continue;
    auto& row = by_role[it->second];
    if (e.event_kind == EventKind::ToolCall) ++row.tool_calls;
    if (e.event_kind == EventKind::TokenUsage) row.tokens += e.tokens->total();
  }

  RoleTable t;
  for (Role r : kAllRoles) {
    auto it = by_role.find(r);
    if (it == by_role.end()) continue;
    t.rows.push_back(it->second);
    t.totals.agents += it->second.agents;
    t.totals.tokens += it->second.tokens;
    t.totals.tool_calls += it->second.tool_calls;
  }
  return t;
}

// ---- prices and cost ----

std::int64_t parse_price_micros(std::string_view dollars) {
  const std::string_view s = text::trim(dollars);
  const auto dot = s.find('.');
  const std::string_view whole = s.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view() : s.substr(dot + 1);
  auto digits = [](std::string_view d) {
    return std::all_of(d.begin(), d.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (whole.empty() || !digits(whole) || !digits(frac) || frac.size() > 6 || whole.size() > 9 ||
      (dot != std::string_view::npos && frac.empty())) {
    raise(ErrorKind::InvalidConfig, "price must be a non-negative decimal with at most 6 places: " + std::string(s));
  }
  std::int64_t v = 0;
  for (char c : whole) v = v * 10 + (c - '0');
  for (std::size_t i = 0; i < 6; ++i) v = v * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  return v;
}

std::string_view PriceSchedule::default_text() { return embedded::prices; }

const PriceSchedule& PriceSchedule::defaults() {
  static const PriceSchedule p = parse(default_text());
  return p;
}

PriceSchedule PriceSchedule::parse(std::string_view doc) {
  const auto kv = text::parse_key_values(doc);
  PriceSchedule p;
  std::set<std::string> seen;
  for (const auto& [key, value] : kv) {
    std::int64_t* slot = key == "input"            ? &p.input
                         : key == "output"         ? &p.output
                         : key == "cache_creation" ? &p.cache_creation
                         : key == "cache_read"     ? &p.cache_read
                                                   : nullptr;
    if (!slot) raise(ErrorKind::InvalidConfig, "unknown price category: " + key);
    *slot = parse_price_micros(value);
    seen.insert(key);
  }
  if (seen.size() != 4) raise(ErrorKind::InvalidConfig, "price schedule needs input, output, cache_creation, cache_read");
  return p;
}

PriceSchedule PriceSchedule::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) raise(ErrorKind::InvalidConfig, "cannot read " + path.string());
  return parse(text::read_file(path));
}

CostTable token_cost_table(const std::vector<AgentEvent>& events, const PriceSchedule& prices) {
  TokenCounts sum;
  for (const auto& e : events) {
    if (e.event_kind == EventKind::TokenUsage) sum += *e.tokens;
  }
  CostTable t;
  const std::pair<const char*, std::pair<std::int64_t, std::int64_t>> cats[] = {
      {"input", {sum.input, prices.input}},
      {"output", {sum.output, prices.output}},
      {"cache_creation", {sum.cache_creation, prices.cache_creation}},
      {"cache_read", {sum.cache_read, prices.cache_read}},
  };
  t.totals.category = "total";
  for (const auto& [name, tp] : cats) {
    CostRow row;
    row.category = name;
    row.tokens = tp.first;
    row.cost_pico = tp.first * tp.second;
    t.totals.tokens += row.tokens;
    t.totals.cost_pico += row.cost_pico;
    t.rows.push_back(row);
  }
  for (auto& row : t.rows) {
    row.token_share = t.totals.tokens ? static_cast<double>(row.tokens) / static_cast<double>(t.totals.tokens) : 0.0;
    row.cost_share =
        t.totals.cost_pico ? static_cast<double>(row.cost_pico) / static_cast<double>(t.totals.cost_pico) : 0.0;
  }
  t.totals.token_share = t.totals.tokens ? 1.0 : 0.0;
  t.totals.cost_share = t.totals.cost_pico ? 1.0 : 0.0;
  return t;
}

// ---- time ----

GapReport detect_gaps(const std::vector<AgentEvent>& events, Millis threshold) {
  if (events.empty()) raise(ErrorKind::EmptyStream, "no events");
  if (threshold <= 0) raise(ErrorKind::InvalidArgument, "gap threshold must be positive");
  std::vector<Millis> times;
  times.reserve(events.size());
  for (const auto& e : events) times.push_back(e.timestamp);
  std::sort(times.begin(), times.end());

  GapReport r;
  r.wall_clock_duration = times.back() - times.front();
  Millis idle = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] - times[i - 1] > threshold) {
      r.gaps.push_back({times[i - 1], times[i]});
      idle += times[i] - times[i - 1];
    }
  }
  r.active_duration = r.wall_clock_duration - idle;
  return r;
}

std::vector<CurvePoint> solve_curve(const std::vector<AgentEvent>& events) {
  std::vector<CurvePoint> out;
  if (events.empty()) return out;
  std::vector<const AgentEvent*> sorted;
  for (const auto& e : events) sorted.push_back(&e);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const AgentEvent* a, const AgentEvent* b) { return a->timestamp < b->timestamp; });

  const Millis start = sorted.front()->timestamp;
  std::int64_t tokens = 0;
  int solved = 0;
  std::set<std::string> seen;
  std::vector<CurvePoint> pending;  // solves waiting for same-timestamp token events
  out.push_back({0, 0, 0, std::nullopt});

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const AgentEvent& e = *sorted[i];
    if (e.event_kind == EventKind::TokenUsage) tokens += e.tokens->total();
    if (e.event_kind == EventKind::ProblemSolved) {
      const std::string label = e.problem.value_or(e.agent_id);
      if (seen.insert(label).second) pending.push_back({e.timestamp - start, 0, ++solved, label});
    }
    // A sample counts every token spent up to and including its instant.
    if (i + 1 == sorted.size() || sorted[i + 1]->timestamp != e.timestamp) {
      for (auto& p : pending) {
        p.tokens_so_far = tokens;
        out.push_back(std::move(p));
      }
      pending.clear();
    }
  }
  out.push_back({sorted.back()->timestamp - start, tokens, solved, std::nullopt});
  return out;
}

std::vector<CompileRateRow> compile_success_rate(const std::vector<AgentEvent>& events) {
  std::map<std::string, CompileRateRow> rows;
  for (const auto& e : events) {
    if (e.event_kind != EventKind::ToolCall || *e.tool_name != kCompileTool || !e.problem || !e.success) continue;
    auto& row = rows[*e.problem];
    row.problem = *e.problem;
    ++row.attempts;
    if (*e.success) ++row.successes;
  }
  std::vector<CompileRateRow> out;
  for (auto& [p, row] : rows) {
    row.rate = static_cast<double>(row.successes) / static_cast<double>(row.attempts);
    out.push_back(row);
  }
  return out;
}

double median_rate(const std::vector<CompileRateRow>& rows) {
  if (rows.empty()) return 0;
  std::vector<double> r;
  for (const auto& row : rows) r.push_back(row.rate);
  std::sort(r.begin(), r.end());
  const std::size_t n = r.size();
  return n % 2 ? r[n / 2] : (r[n / 2 - 1] + r[n / 2]) / 2;
}

// ---- scaling ----

std::string_view GroupMap::default_text() { return embedded::problem_groups; }

const GroupMap& GroupMap::defaults() {
  static const GroupMap g = parse(default_text());
  return g;
}

GroupMap GroupMap::parse(std::string_view doc) {
  GroupMap g;
  for (const auto& line : text::data_lines(doc)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) raise(ErrorKind::InvalidConfig, "group line needs `problem = group`: " + line);
    std::string problem(text::trim(std::string_view(line).substr(0, eq)));
    std::string group(text::trim(std::string_view(line).substr(eq + 1)));
    if (problem.empty() || group.empty()) raise(ErrorKind::InvalidConfig, "group line needs `problem = group`: " + line);
    if (!g.problem_to_group.emplace(problem, group).second) {
      raise(ErrorKind::InvalidConfig, "problem listed twice in group map: " + problem);
    }
    if (std::find(g.group_order.begin(), g.group_order.end(), group) == g.group_order.end()) {
      g.group_order.push_back(group);
    }
  }
  return g;
}

GroupMap GroupMap::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) raise(ErrorKind::InvalidConfig, "cannot read " + path.string());
  return parse(text::read_file(path));
}

std::vector<ScalingRow> scaling_table(const std::vector<AgentEvent>& events, const GroupMap& groups, Millis threshold) {
  if (threshold <= 0) raise(ErrorKind::InvalidArgument, "gap threshold must be positive");
  std::map<std::string, ScalingRow> rows;
  std::map<std::string, std::vector<Millis>> times;
  for (const auto& name : groups.group_order) rows[name].group = name;
  for (const auto& [problem, group] : groups.problem_to_group) ++rows[group].problems;

  for (const auto& e : events) {
    if (!e.problem) continue;
    auto it = groups.problem_to_group.find(*e.problem);
    if (it == groups.problem_to_group.end()) raise(ErrorKind::UnassignedProblem, "problem without a group: " + *e.problem);
    times[it->second].push_back(e.timestamp);
    if (e.event_kind == EventKind::TokenUsage) rows[it->second].tokens += e.tokens->total();
  }
  for (auto& [group, ts] : times) {
    std::sort(ts.begin(), ts.end());
    Millis active = 0;
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (ts[i] - ts[i - 1] <= threshold) active += ts[i] - ts[i - 1];
    }
    rows[group].active_time = active;
  }
  std::vector<ScalingRow> out;
  for (const auto& name : groups.group_order) out.push_back(rows[name]);
  return out;
}

}  // namespace rocq::analytics
