#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rocq::analytics {

// Milliseconds since the Unix epoch, UTC.
using Millis = std::int64_t;

inline constexpr Millis kMinute = 60'000;
inline constexpr Millis kHour = 60 * kMinute;

// Parses `YYYY-MM-DDTHH:MM:SS[.fff]Z` (or a +00:00 suffix). nullopt on junk.
std::optional<Millis> parse_timestamp(std::string_view s);
std::string format_timestamp(Millis t);

enum class EventKind { ToolCall, TokenUsage, AgentSpawn, ProblemSolved };
std::string_view to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(std::string_view s);

struct TokenCounts {
  std::int64_t input = 0;
  std::int64_t output = 0;
  std::int64_t cache_creation = 0;
  std::int64_t cache_read = 0;

  std::int64_t total() const { return input + output + cache_creation + cache_read; }
  TokenCounts& operator+=(const TokenCounts& o);
  bool operator==(const TokenCounts&) const = default;
};

struct AgentEvent {
  Millis timestamp = 0;
  std::string agent_id;
  std::optional<std::string> parent_id;
  std::optional<std::string> problem;
  EventKind event_kind = EventKind::ToolCall;
  std::optional<std::string> tool_name;
  std::optional<bool> success;
  std::optional<TokenCounts> tokens;
  std::optional<std::string> initial_prompt;
};

// nullopt when the object is not a valid event (missing fields, unknown
// kind, negative counts).
std::optional<AgentEvent> event_from_json(const nlohmann::json& j);
nlohmann::json event_to_json(const AgentEvent& e);

struct IngestResult {
  std::vector<AgentEvent> events;  // sorted by timestamp, stable in file order
  std::size_t files = 0;
  std::size_t malformed_count = 0;
  // Events whose timestamp is earlier than the previous event of the same
  // agent in its file. Kept, only counted.
  std::size_t out_of_order = 0;
};

// Reads JSON-Lines files; directories are searched recursively for *.jsonl.
// Throws Error{NoReadableInput} when no file can be read.
IngestResult ingest(const std::vector<std::filesystem::path>& paths);
IngestResult ingest_text(const std::vector<std::string>& documents);

// ---- roles ----

enum class Role { LemmaProver, BugFixer, General, Verifier, ProofCompleter, Compiler };
inline constexpr Role kAllRoles[] = {Role::LemmaProver, Role::BugFixer,       Role::General,
                                     Role::Verifier,    Role::ProofCompleter, Role::Compiler};
std::string_view to_string(Role r);
std::optional<Role> role_from_string(std::string_view s);

class RoleRules {
 public:
  static std::string_view default_text();
  static const RoleRules& defaults();
  // Throws Error{InvalidConfig}.
  static RoleRules parse(std::string_view doc);
  static RoleRules load(const std::filesystem::path& path);

  Role classify(std::string_view prompt) const;
  std::size_t size() const { return rules_.size(); }

 private:
  struct Rule;
  std::vector<std::shared_ptr<const Rule>> rules_;
};

Role classify_role(std::string_view initial_prompt, const RoleRules& rules = RoleRules::defaults());

// ---- tables ----

struct ToolUsageRow {
  std::string tool;
  std::int64_t calls = 0;
  double share = 0;  // of all tool calls
};
// Sorted by calls, descending, then by name.
std::vector<ToolUsageRow> tool_usage_table(const std::vector<AgentEvent>& events);

struct CallSplit {
  std::int64_t total = 0;
  std::int64_t by_spawned_agents = 0;
  std::int64_t other = 0;  // the orchestrator and anything never spawned
  std::int64_t mcp = 0;    // tools named rocq_*
};
CallSplit call_split(const std::vector<AgentEvent>& events);

struct RoleRow {
  Role role = Role::General;
  std::int64_t agents = 0;
  std::int64_t tokens = 0;
  std::int64_t tool_calls = 0;
};
struct RoleTable {
  std::vector<RoleRow> rows;  // roles with at least one agent, in enum order
  RoleRow totals;             // role field unused
};
// Only agents announced by an AgentSpawn event are counted.
RoleTable role_table(const std::vector<AgentEvent>& events, const RoleRules& rules = RoleRules::defaults());

// Prices are held exactly as micro-dollars per million tokens, so a token
// count times a price is an exact integer in pico-dollars.
struct PriceSchedule {
  std::int64_t input = 0;
  std::int64_t output = 0;
  std::int64_t cache_creation = 0;
  std::int64_t cache_read = 0;

  static std::string_view default_text();
  static const PriceSchedule& defaults();
  // `category = dollars` lines; all four categories required. Throws InvalidConfig.
  static PriceSchedule parse(std::string_view doc);
  static PriceSchedule load(const std::filesystem::path& path);
};
// "1.50" -> 1'500'000. Throws InvalidConfig.
std::int64_t parse_price_micros(std::string_view dollars);

struct CostRow {
  std::string category;
  std::int64_t tokens = 0;
  double token_share = 0;
  std::int64_t cost_pico = 0;
  double cost_share = 0;

  double cost_dollars() const { return static_cast<double>(cost_pico) / 1e12; }
};
struct CostTable {
  std::vector<CostRow> rows;  // input, output, cache_creation, cache_read
  CostRow totals;
};
CostTable token_cost_table(const std::vector<AgentEvent>& events, const PriceSchedule& prices = PriceSchedule::defaults());

inline constexpr Millis kDefaultGapThreshold = 30 * kMinute;

struct Gap {
  Millis start = 0;
  Millis end = 0;
  Millis duration() const { return end - start; }
};
struct GapReport {
  std::vector<Gap> gaps;
  Millis active_duration = 0;
  Millis wall_clock_duration = 0;
};
// Throws EmptyStream (no events), InvalidArgument (threshold <= 0).
GapReport detect_gaps(const std::vector<AgentEvent>& events, Millis threshold = kDefaultGapThreshold);

struct CurvePoint {
  Millis time_since_start = 0;
  std::int64_t tokens_so_far = 0;
  int cumulative_solved = 0;
  std::optional<std::string> problem;  // the problem solved at this sample
};
// Start sample, one per first solve of each problem, end sample.
std::vector<CurvePoint> solve_curve(const std::vector<AgentEvent>& events);

struct CompileRateRow {
  std::string problem;
  std::int64_t attempts = 0;
  std::int64_t successes = 0;
  double rate = 0;
};
inline constexpr std::string_view kCompileTool = "rocq_compile";
// Ordered by problem label.
std::vector<CompileRateRow> compile_success_rate(const std::vector<AgentEvent>& events);
double median_rate(const std::vector<CompileRateRow>& rows);

struct GroupMap {
  std::vector<std::string> group_order;
  std::map<std::string, std::string> problem_to_group;

  static std::string_view default_text();
  static const GroupMap& defaults();
  static GroupMap parse(std::string_view doc);
  static GroupMap load(const std::filesystem::path& path);
};

struct ScalingRow {
  std::string group;
  std::int64_t problems = 0;
  Millis active_time = 0;  // gap-excluded time during which the group's problems had activity
  std::int64_t tokens = 0;
};
// Throws UnassignedProblem for an event labelled with a problem not in the map.
std::vector<ScalingRow> scaling_table(const std::vector<AgentEvent>& events, const GroupMap& groups,
                                      Millis threshold = kDefaultGapThreshold);

// ---- rendering ----

struct AnalysisOptions {
  PriceSchedule prices = PriceSchedule::defaults();
  GroupMap groups = GroupMap::defaults();
  RoleRules roles = RoleRules::defaults();
  Millis gap_threshold = kDefaultGapThreshold;
};

enum class Emit { Table, Csv, Series };

std::string render_analysis(const IngestResult& input, const AnalysisOptions& options, Emit emit);

}  // namespace rocq::analytics
