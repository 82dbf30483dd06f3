#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rocq/analytics/analytics.hpp"

namespace rocq::analytics {

// Synthetic logs shaped like the twelve-problem reference run: one
// orchestrator, 141 spawned agents, eight active stretches separated by
// seven long pauses. The seed only moves events around inside their
// windows; every count, token total and solve time is fixed.
struct FixtureFile {
  std::string relative_path;  // e.g. agents/agent-007.jsonl
  std::vector<AgentEvent> events;
};

struct Fixture {
  std::vector<FixtureFile> files;
  std::vector<AgentEvent> all_events() const;  // merged, sorted by timestamp
};

// Throws Error{InvalidArgument} if the encoded budgets cannot be laid out
// (a bug in the tables, not an input problem).
Fixture build_reference_fixture(std::uint64_t seed = 1);

void write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

}  // namespace rocq::analytics
