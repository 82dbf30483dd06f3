#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <sys/types.h>

namespace rocq::backend {

struct ProcessResult {
  int exit_status = 0;  // 128 + signal number when the child was signalled
  std::string out;
  std::string err;
  std::int64_t duration_ms = 0;
  bool timed_out = false;
};

struct ProcessSpec {
  std::vector<std::string> argv;  // argv[0] resolved through PATH when it has no '/'
  std::filesystem::path cwd;
  std::vector<std::string> env;   // KEY=VALUE entries; the child sees exactly these
  std::chrono::milliseconds timeout{60000};
};

// Locates an executable the way execvp would. Empty when not found.
std::optional<std::filesystem::path> find_executable(const std::filesystem::path& name);

// The current environment with network proxy variables removed.
std::vector<std::string> sanitized_environment();

// Runs a child in its own process group, capturing both streams. On timeout
// the whole group is killed; after the leader exits any helpers left in its
// group are killed too, and the leader is always reaped.
// Throws Error{CompilerNotFound} when argv[0] cannot be resolved and
// Error{SpawnFailure} for OS-level failures.
ProcessResult run_process(const ProcessSpec& spec);

// A long-lived child connected through pipes (stdin/stdout); stderr goes to
// /dev/null. Used for the interactive engine.
class ChildProcess {
 public:
  ChildProcess(std::vector<std::string> argv, const std::filesystem::path& cwd);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  // Writes all bytes; false when the pipe is closed.
  bool write_all(std::string_view bytes);

  // Reads available bytes, waiting at most `timeout`. Returns std::nullopt on
  // timeout and an empty string on EOF.
  std::optional<std::string> read_some(std::chrono::milliseconds timeout);

  bool running();
  void terminate();
  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool reaped_ = false;
};

}  // namespace rocq::backend
