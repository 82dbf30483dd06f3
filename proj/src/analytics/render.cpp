#include <cstdio>
#include <sstream>

#include "rocq/analytics/analytics.hpp"

namespace rocq::analytics {

namespace {

std::string fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

std::string millions(std::int64_t tokens) { return fixed(static_cast<double>(tokens) / 1e6, 1) + "M"; }
std::string hours(Millis t) { return fixed(static_cast<double>(t) / static_cast<double>(kHour), 2) + "h"; }
std::string percent(double share) { return fixed(share * 100.0, 1) + "%"; }
std::string dollars(std::int64_t pico) { return "$" + fixed(static_cast<double>(pico) / 1e12, 2); }

// Left-aligned first column, right-aligned rest.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  void rule() { rules_.push_back(rows_.size()); }

  std::string str() const {
    std::vector<std::size_t> width;
    for (const auto& r : rows_) {
      width.resize(std::max(width.size(), r.size()));
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    std::size_t line_width = 0;
    for (auto w : width) line_width += w + 2;
    std::string out;
    auto rule_line = std::string(line_width > 2 ? line_width - 2 : 0, '-') + "\n";
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      for (auto r : rules_) {
        if (r == k) out += rule_line;
      }
      std::string line;
      for (std::size_t i = 0; i < rows_[k].size(); ++i) {
        const auto& cell = rows_[k][i];
        std::string pad(width[i] - cell.size(), ' ');
        line += i == 0 ? cell + pad : pad + cell;
        if (i + 1 < rows_[k].size()) line += "  ";
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out += line + "\n";
      if (k == 0) out += rule_line;
    }
    return out;
  }

 private:
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> rules_;
};

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_cell(cells[i]);
  return out + "\n";
}

std::string series_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "hours,tokens,solved,problem\n";
  for (const auto& p : curve) {
    out += csv_row({fixed(static_cast<double>(p.time_since_start) / static_cast<double>(kHour), 4),
                    std::to_string(p.tokens_so_far), std::to_string(p.cumulative_solved), p.problem.value_or("")});
  }
  return out;
}

}  // namespace

std::string render_analysis(const IngestResult& input, const AnalysisOptions& options, Emit emit) {
  const auto& events = input.events;
  const auto curve = solve_curve(events);
  if (emit == Emit::Series) return series_csv(curve);

  const auto tools = tool_usage_table(events);
  const auto split = call_split(events);
  const auto roles = role_table(events, options.roles);
  const auto costs = token_cost_table(events, options.prices);
  const auto gaps = detect_gaps(events, options.gap_threshold);
  const auto rates = compile_success_rate(events);
  const auto scaling = scaling_table(events, options.groups, options.gap_threshold);

  if (emit == Emit::Csv) {
    std::string out;
    out += "# tools\n" + csv_row({"tool", "calls", "share"});
    for (const auto& r : tools) out += csv_row({r.tool, std::to_string(r.calls), fixed(r.share, 6)});
    out += "\n# calls\n" + csv_row({"total", "spawned_agents", "other", "mcp"});
    out += csv_row({std::to_string(split.total), std::to_string(split.by_spawned_agents), std::to_string(split.other),
                    std::to_string(split.mcp)});
    out += "\n# roles\n" + csv_row({"role", "agents", "tokens", "tool_calls"});
    for (const auto& r : roles.rows) {
      out += csv_row({std::string(to_string(r.role)), std::to_string(r.agents), std::to_string(r.tokens),
                      std::to_string(r.tool_calls)});
    }
    out += csv_row({"total", std::to_string(roles.totals.agents), std::to_string(roles.totals.tokens),
                    std::to_string(roles.totals.tool_calls)});
    out += "\n# tokens\n" + csv_row({"category", "tokens", "token_share", "cost", "cost_share"});
    for (const auto* r : {&costs.rows[0], &costs.rows[1], &costs.rows[2], &costs.rows[3], &costs.totals}) {
      out += csv_row({r->category, std::to_string(r->tokens), fixed(r->token_share, 6), fixed(r->cost_dollars(), 6),
                      fixed(r->cost_share, 6)});
    }
    out += "\n# scaling\n" + csv_row({"group", "problems", "active_hours", "tokens"});
    for (const auto& r : scaling) {
      out += csv_row({r.group, std::to_string(r.problems),
                      fixed(static_cast<double>(r.active_time) / static_cast<double>(kHour), 4),
                      std::to_string(r.tokens)});
    }
    out += "\n# gaps\n" + csv_row({"start", "end", "hours"});
    for (const auto& g : gaps.gaps) {
      out += csv_row({format_timestamp(g.start), format_timestamp(g.end),
                      fixed(static_cast<double>(g.duration()) / static_cast<double>(kHour), 4)});
    }
    out += "\n# activity\n" + csv_row({"active_hours", "wall_clock_hours", "gaps"});
    out += csv_row({fixed(static_cast<double>(gaps.active_duration) / static_cast<double>(kHour), 4),
                    fixed(static_cast<double>(gaps.wall_clock_duration) / static_cast<double>(kHour), 4),
                    std::to_string(gaps.gaps.size())});
    out += "\n# compile_rates\n" + csv_row({"problem", "attempts", "successes", "rate"});
    for (const auto& r : rates) {
      out += csv_row({r.problem, std::to_string(r.attempts), std::to_string(r.successes), fixed(r.rate, 6)});
    }
    out += "\n# solve_curve\n" + series_csv(curve);
    return out;
  }

  std::ostringstream out;
  out << "events: " << events.size() << " from " << input.files << " file(s)";
  if (input.malformed_count) out << ", " << input.malformed_count << " malformed line(s) skipped";
  if (input.out_of_order) out << ", " << input.out_of_order << " out-of-order event(s)";
  out << "\n\n";

  out << "Tool usage\n";
  TextTable tt({"tool", "calls", "share"});
  for (const auto& r : tools) tt.add({r.tool, std::to_string(r.calls), percent(r.share)});
  out << tt.str();
  out << "calls: " << split.total << " total, " << split.by_spawned_agents << " by spawned agents, " << split.other
      << " by others; rocq_* tools " << split.mcp << " ("
      << percent(split.total ? static_cast<double>(split.mcp) / static_cast<double>(split.total) : 0.0) << ")\n\n";

  out << "Subagent roles\n";
  TextTable rt({"role", "agents", "tokens", "tool calls"});
  for (const auto& r : roles.rows) {
    rt.add({std::string(to_string(r.role)), std::to_string(r.agents), millions(r.tokens), std::to_string(r.tool_calls)});
  }
  rt.rule();
  rt.add({"total", std::to_string(roles.totals.agents), millions(roles.totals.tokens),
          std::to_string(roles.totals.tool_calls)});
  out << rt.str() << "\n";

  out << "Token economics\n";
  TextTable ct({"category", "tokens", "%", "cost", "% cost"});
  for (const auto& r : costs.rows) {
    ct.add({r.category, millions(r.tokens), percent(r.token_share), dollars(r.cost_pico), percent(r.cost_share)});
  }
  ct.rule();
  ct.add({"total", millions(costs.totals.tokens), percent(costs.totals.token_share), dollars(costs.totals.cost_pico),
          percent(costs.totals.cost_share)});
  out << ct.str() << "\n";

  out << "Scaling by group\n";
  TextTable st({"group", "problems", "active time", "tokens"});
  for (const auto& r : scaling) st.add({r.group, std::to_string(r.problems), hours(r.active_time), millions(r.tokens)});
  out << st.str() << "\n";

  out << "Activity (gap threshold " << fixed(static_cast<double>(options.gap_threshold) / kMinute, 0) << " min)\n";
  out << "wall clock " << hours(gaps.wall_clock_duration) << ", active " << hours(gaps.active_duration) << ", "
      << gaps.gaps.size() << " gap(s)\n";
  for (const auto& g : gaps.gaps) {
    out << "  " << format_timestamp(g.start) << " .. " << format_timestamp(g.end) << "  " << hours(g.duration()) << "\n";
  }
  out << "\n";

  out << "Compile success\n";
  TextTable cr({"problem", "attempts", "successes", "rate"});
  for (const auto& r : rates) {
    cr.add({r.problem, std::to_string(r.attempts), std::to_string(r.successes), percent(r.rate)});
  }
  out << cr.str();
  if (!rates.empty()) out << "median " << percent(median_rate(rates)) << "\n";
  out << "\n";

  out << "Solves\n";
  TextTable sc({"problem", "hours", "tokens", "solved"});
  for (const auto& p : curve) {
    if (!p.problem) continue;
    sc.add({*p.problem, hours(p.time_since_start), millions(p.tokens_so_far), std::to_string(p.cumulative_solved)});
  }
  out << sc.str();
  return out.str();
}

}  // namespace rocq::analytics
