#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>

#include "rocq/analytics/analytics.hpp"
#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"

namespace rocq::analytics {

using nlohmann::json;
namespace chr = std::chrono;

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

std::optional<Millis> parse_timestamp(std::string_view s) {
  // 2025-12-06T17:00:00[.123](Z|+00:00)
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
      s[16] != ':') {
    return std::nullopt;
  }
  auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    auto f = s.substr(pos, len);
    if (!all_digits(f)) return std::nullopt;
    return to_int(f);
  };
  auto y = field(0, 4), mo = field(5, 2), d = field(8, 2), h = field(11, 2), mi = field(14, 2), se = field(17, 2);
  if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
  if (*h > 23 || *mi > 59 || *se > 60) return std::nullopt;

  std::string_view rest = s.substr(19);
  Millis ms = 0;
  if (!rest.empty() && rest.front() == '.') {
    std::size_t n = 1;
    while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9') ++n;
    if (n == 1) return std::nullopt;
    auto frac = rest.substr(1, n - 1);
    for (std::size_t i = 0; i < 3; ++i) ms = ms * 10 + (i < frac.size() ? frac[i] - '0' : 0);
    rest.remove_prefix(n);
  }
  if (rest != "Z" && rest != "+00:00") return std::nullopt;

  chr::year_month_day ymd{chr::year{*y}, chr::month{static_cast<unsigned>(*mo)}, chr::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  const Millis days = chr::sys_days{ymd}.time_since_epoch().count();
  return ((days * 24 + *h) * 60 + *mi) * kMinute + Millis{*se} * 1000 + ms;
}

std::string format_timestamp(Millis t) {
  Millis days = t / (24 * kHour);
  Millis rem = t % (24 * kHour);
  if (rem < 0) {
    rem += 24 * kHour;
    --days;
  }
  chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(rem / kHour), static_cast<long long>(rem / kMinute % 60),
                static_cast<long long>(rem / 1000 % 60), static_cast<long long>(rem % 1000));
  return buf;
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::ToolCall: return "ToolCall";
    case EventKind::TokenUsage: return "TokenUsage";
    case EventKind::AgentSpawn: return "AgentSpawn";
    case EventKind::ProblemSolved: return "ProblemSolved";
  }
  return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::ToolCall, EventKind::TokenUsage, EventKind::AgentSpawn, EventKind::ProblemSolved}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

TokenCounts& TokenCounts::operator+=(const TokenCounts& o) {
  input += o.input;
  output += o.output;
  cache_creation += o.cache_creation;
  cache_read += o.cache_read;
  return *this;
}

namespace {

std::optional<std::string> opt_text(const json& j, const char* key, bool& bad) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) {
    bad = true;
    return std::nullopt;
  }
  return j[key].get<std::string>();
}

}  // namespace

std::optional<AgentEvent> event_from_json(const json& j) {
  if (!j.is_object()) return std::nullopt;
  if (!j.contains("timestamp") || !j["timestamp"].is_string()) return std::nullopt;
  if (!j.contains("agent_id") || !j["agent_id"].is_string()) return std::nullopt;
  if (!j.contains("event_kind") || !j["event_kind"].is_string()) return std::nullopt;

  AgentEvent e;
  auto ts = parse_timestamp(j["timestamp"].get<std::string>());
  auto kind = event_kind_from_string(j["event_kind"].get<std::string>());
  if (!ts || !kind) return std::nullopt;
  e.timestamp = *ts;
  e.event_kind = *kind;
  e.agent_id = j["agent_id"].get<std::string>();

  bool bad = false;
  e.parent_id = opt_text(j, "parent_id", bad);
  e.problem = opt_text(j, "problem", bad);
  e.tool_name = opt_text(j, "tool_name", bad);
  e.initial_prompt = opt_text(j, "initial_prompt", bad);
  if (bad) return std::nullopt;

  if (j.contains("success") && !j["success"].is_null()) {
    if (!j["success"].is_boolean()) return std::nullopt;
    e.success = j["success"].get<bool>();
  }
  if (j.contains("tokens") && !j["tokens"].is_null()) {
    const json& t = j["tokens"];
    if (!t.is_object()) return std::nullopt;
    TokenCounts c;
    for (auto [key, slot] : {std::pair{"input", &c.input}, std::pair{"output", &c.output},
                             std::pair{"cache_creation", &c.cache_creation}, std::pair{"cache_read", &c.cache_read}}) {
      if (!t.contains(key)) continue;
      if (!t[key].is_number_integer() || t[key].get<std::int64_t>() < 0) return std::nullopt;
      *slot = t[key].get<std::int64_t>();
    }
    e.tokens = c;
  }
  if (e.event_kind == EventKind::ToolCall && !e.tool_name) return std::nullopt;
  if (e.event_kind == EventKind::TokenUsage && !e.tokens) return std::nullopt;
  return e;
}

json event_to_json(const AgentEvent& e) {
  json j{{"timestamp", format_timestamp(e.timestamp)}, {"agent_id", e.agent_id}};
  if (e.parent_id) j["parent_id"] = *e.parent_id;
  if (e.problem) j["problem"] = *e.problem;
  j["event_kind"] = to_string(e.event_kind);
  if (e.tool_name) j["tool_name"] = *e.tool_name;
  if (e.success) j["success"] = *e.success;
  if (e.tokens) {
    j["tokens"] = json{{"input", e.tokens->input},
                       {"output", e.tokens->output},
                       {"cache_creation", e.tokens->cache_creation},
                       {"cache_read", e.tokens->cache_read}};
  }
  if (e.initial_prompt) j["initial_prompt"] = *e.initial_prompt;
  return j;
}

namespace {

void ingest_document(std::string_view doc, IngestResult& out) {
  std::map<std::string, Millis, std::less<>> last_seen;
  for (auto line : text::split_lines(doc)) {
    line = text::trim(line);
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    auto e = j.is_discarded() ? std::nullopt : event_from_json(j);
    if (!e) {
      ++out.malformed_count;
      continue;
    }
    auto [it, fresh] = last_seen.try_emplace(e->agent_id, e->timestamp);
    if (!fresh) {
      if (e->timestamp < it->second) ++out.out_of_order;
      it->second = std::max(it->second, e->timestamp);
    }
    out.events.push_back(std::move(*e));
  }
}

void finish(IngestResult& r) {
  std::stable_sort(r.events.begin(), r.events.end(),
                   [](const AgentEvent& a, const AgentEvent& b) { return a.timestamp < b.timestamp; });
}

}  // namespace

IngestResult ingest_text(const std::vector<std::string>& documents) {
  IngestResult r;
  for (const auto& d : documents) {
    ingest_document(d, r);
    ++r.files;
  }
  finish(r);
  return r;
}

IngestResult ingest(const std::vector<std::filesystem::path>& paths) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      for (auto it = fs::recursive_directory_iterator(p, ec); !ec && it != fs::recursive_directory_iterator();
           it.increment(ec)) {
        if (it->is_regular_file(ec) && it->path().extension() == ".jsonl") files.push_back(it->path());
      }
    } else if (fs::is_regular_file(p, ec)) {
      files.push_back(p);
    }
  }
  // Directory iteration order is unspecified; sort so ties between files
  // resolve the same way everywhere.
  std::sort(files.begin(), files.end());

  IngestResult r;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) continue;
    std::string doc((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ingest_document(doc, r);
    ++r.files;
  }
  if (r.files == 0) raise(ErrorKind::NoReadableInput, "no readable .jsonl input");
  finish(r);
  return r;
}

}  // namespace rocq::analytics
