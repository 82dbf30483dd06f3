#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rocq/common/framing.hpp"
#include "rocq/interactive/session.hpp"
#include "rocq/server/config.hpp"

namespace rocq::server {

struct ToolDescriptor {
  std::string name;
  std::string description;
  nlohmann::json input_schema;
};

// The eight tools, in listing order.
const std::vector<ToolDescriptor>& tool_descriptors();

struct ToolResult {
  bool ok = false;
  nlohmann::json payload;
  std::optional<std::string> error_kind;  // present iff !ok
  std::string human_text;
};

namespace rpc {
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kInternalError = -32603;
}  // namespace rpc

inline constexpr const char* kSupportedProtocolVersions[] = {"2024-11-05", "2025-03-26", "2025-06-18"};

class ToolServer {
 public:
  explicit ToolServer(const Resources& resources);

  // Routes one tool call. Tool-level failures come back as ok=false results;
  // only schema problems throw (Error{SchemaViolation}), and unknown names
  // throw Error{InvalidArgument}.
  ToolResult dispatch(const std::string& name, const nlohmann::json& arguments);

  // Handles one framed message; nullopt for notifications.
  std::optional<std::string> handle_message(const std::string& message);

  // Serves until the input closes. With concurrency > 1, calls that name a
  // session run in that session's arrival order on a fixed worker, and
  // responses are written as they complete. Returns nonzero only when the
  // output stream fails.
  int serve(std::istream& in, std::ostream& out, framing::Framing framing = framing::Framing::Lines,
            std::size_t concurrency = 1);

  interactive::SessionManager& sessions() { return sessions_; }

 private:
  nlohmann::json handle_request(const nlohmann::json& request);

  const Resources& res_;
  interactive::SessionManager sessions_;
};

// Converts a tool result to the MCP `tools/call` result object.
nlohmann::json call_result_json(const ToolResult& r);

}  // namespace rocq::server
