#include "rocq/backend/process.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "rocq/common/error.hpp"

extern char** environ;

namespace rocq::backend {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.release();
    }
    return *this;
  }
  int get() const { return fd_; }
  int release() { return std::exchange(fd_, -1); }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  explicit operator bool() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

void make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    raise(ErrorKind::SpawnFailure, std::string("pipe: ") + std::strerror(errno));
  }
  read_end = Fd(fds[0]);
  write_end = Fd(fds[1]);
}

struct CStrings {
  std::vector<std::string> storage;
  std::vector<char*> ptrs;
  explicit CStrings(std::vector<std::string> v) : storage(std::move(v)) {
    for (auto& s : storage) ptrs.push_back(s.data());
    ptrs.push_back(nullptr);
  }
};

// Reads the exec-status pipe: a child that failed to exec writes its errno.
int read_exec_errno(Fd& status_read) {
  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(status_read.get(), &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  return n == static_cast<ssize_t>(sizeof child_errno) ? child_errno : 0;
}

[[noreturn]] void child_fail(int status_fd, int err) {
  [[maybe_unused]] auto ignored = ::write(status_fd, &err, sizeof err);
  ::_exit(127);
}

int decode_status(int st) {
  if (WIFEXITED(st)) return WEXITSTATUS(st);
  if (WIFSIGNALED(st)) return 128 + WTERMSIG(st);
  return -1;
}

void kill_group(pid_t pgid) {
  if (pgid > 0) ::kill(-pgid, SIGKILL);
}

// True once the child has terminated; the zombie is left in place so the
// process group id cannot be recycled before we signal it.
bool has_exited(pid_t pid) {
  siginfo_t info{};
  if (::waitid(P_PID, static_cast<id_t>(pid), &info, WEXITED | WNOHANG | WNOWAIT) != 0) return false;
  return info.si_pid == pid;
}

int reap(pid_t pid) {
  int st = 0;
  while (::waitpid(pid, &st, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  return decode_status(st);
}

}  // namespace

std::optional<std::filesystem::path> find_executable(const std::filesystem::path& name) {
  if (name.empty()) return std::nullopt;
  auto usable = [](const std::filesystem::path& p) {
    std::error_code ec;
    return std::filesystem::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.native().find('/') != std::string::npos) {
    if (usable(name)) return name;
    return std::nullopt;
  }
  const char* path_env = std::getenv("PATH");
  std::string_view paths = path_env ? path_env : "/usr/local/bin:/usr/bin:/bin";
  while (!paths.empty()) {
    auto colon = paths.find(':');
    auto dir = paths.substr(0, colon);
    auto candidate = std::filesystem::path(dir.empty() ? "." : std::string(dir)) / name;
    if (usable(candidate)) return candidate;
    if (colon == std::string_view::npos) break;
    paths.remove_prefix(colon + 1);
  }
  return std::nullopt;
}

std::vector<std::string> sanitized_environment() {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    auto eq = entry.find('=');
    std::string name(entry.substr(0, eq));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name.size() >= 6 && name.ends_with("_proxy")) continue;
    env.emplace_back(entry);
  }
  return env;
}

ProcessResult run_process(const ProcessSpec& spec) {
  if (spec.argv.empty()) raise(ErrorKind::InvalidArgument, "empty argv");
  auto exe = find_executable(spec.argv.front());
  if (!exe) raise(ErrorKind::CompilerNotFound, "executable not found: " + spec.argv.front());
  ignore_sigpipe();

  Fd out_r, out_w, err_r, err_w, st_r, st_w;
  make_pipe(out_r, out_w);
  make_pipe(err_r, err_w);
  make_pipe(st_r, st_w);

  CStrings argv(spec.argv);
  CStrings envp(spec.env);
  const std::string exe_path = exe->string();
  const std::string cwd = spec.cwd.string();

  const auto start = Clock::now();
  pid_t pid = ::fork();
  if (pid < 0) raise(ErrorKind::SpawnFailure, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull < 0 || ::dup2(devnull, 0) < 0) child_fail(st_w.get(), errno);
    if (::dup2(out_w.get(), 1) < 0 || ::dup2(err_w.get(), 2) < 0) child_fail(st_w.get(), errno);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) child_fail(st_w.get(), errno);
    ::execve(exe_path.c_str(), argv.ptrs.data(), envp.ptrs.data());
    child_fail(st_w.get(), errno);
  }
  ::setpgid(pid, pid);
  out_w.reset();
  err_w.reset();
  st_w.reset();

  if (int child_errno = read_exec_errno(st_r)) {
    reap(pid);
    raise(ErrorKind::SpawnFailure, "cannot execute " + exe_path + ": " + std::strerror(child_errno));
  }

  ProcessResult result;
  const auto deadline = start + spec.timeout;
  std::optional<Clock::time_point> drain_deadline;
  bool exited = false;

  for (;;) {
    const auto now = Clock::now();
    if (!exited && has_exited(pid)) {
      exited = true;
      kill_group(pid);  // helpers the compiler left behind
      drain_deadline = now + std::chrono::milliseconds(500);
    }
    if (!out_r && !err_r && exited) break;
    if (!exited && !result.timed_out && now >= deadline) {
      result.timed_out = true;
      kill_group(pid);
    }
    if (drain_deadline && now >= *drain_deadline) break;

    auto wait = std::chrono::milliseconds(50);
    if (!result.timed_out && !exited) {
      wait = std::min(wait, std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now) +
                                std::chrono::milliseconds(1));
    }
    pollfd fds[2];
    nfds_t count = 0;
    Fd* owners[2];
    std::string* sinks[2];
    if (out_r) {
      fds[count] = {out_r.get(), POLLIN, 0};
      owners[count] = &out_r;
      sinks[count++] = &result.out;
    }
    if (err_r) {
      fds[count] = {err_r.get(), POLLIN, 0};
      owners[count] = &err_r;
      sinks[count++] = &result.err;
    }
    if (count == 0) {
      // Streams closed but the leader still runs: wait for exit or deadline.
      ::poll(nullptr, 0, static_cast<int>(wait.count()));
      continue;
    }
    int ready = ::poll(fds, count, static_cast<int>(std::max<std::int64_t>(wait.count(), 0)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (nfds_t k = 0; k < count; ++k) {
      if (!(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      char buf[8192];
      ssize_t n = ::read(fds[k].fd, buf, sizeof buf);
      if (n > 0) {
        sinks[k]->append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
        owners[k]->reset();
      }
    }
  }

  if (!exited) kill_group(pid);
  result.exit_status = reap(pid);
  result.duration_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
  return result;
}

ChildProcess::ChildProcess(std::vector<std::string> argv_in, const std::filesystem::path& cwd_path) {
  if (argv_in.empty()) raise(ErrorKind::InvalidArgument, "empty argv");
  auto exe = find_executable(argv_in.front());
  if (!exe) raise(ErrorKind::EngineStartFailure, "executable not found: " + argv_in.front());
  ignore_sigpipe();

  Fd in_r, in_w, out_r, out_w, st_r, st_w;
  make_pipe(in_r, in_w);
  make_pipe(out_r, out_w);
  make_pipe(st_r, st_w);
  CStrings argv(std::move(argv_in));
  CStrings envp(sanitized_environment());
  const std::string exe_path = exe->string();
  const std::string cwd = cwd_path.string();

  pid_ = ::fork();
  if (pid_ < 0) raise(ErrorKind::EngineStartFailure, std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::setpgid(0, 0);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull < 0 || ::dup2(devnull, 2) < 0) child_fail(st_w.get(), errno);
    if (::dup2(in_r.get(), 0) < 0 || ::dup2(out_w.get(), 1) < 0) child_fail(st_w.get(), errno);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) child_fail(st_w.get(), errno);
    ::execve(exe_path.c_str(), argv.ptrs.data(), envp.ptrs.data());
    child_fail(st_w.get(), errno);
  }
  ::setpgid(pid_, pid_);
  in_r.reset();
  out_w.reset();
  st_w.reset();
  if (int child_errno = read_exec_errno(st_r)) {
    reap(pid_);
    reaped_ = true;
    raise(ErrorKind::EngineStartFailure, "cannot execute " + exe_path + ": " + std::strerror(child_errno));
  }
  to_child_ = in_w.release();
  from_child_ = out_r.release();
}

ChildProcess::~ChildProcess() { terminate(); }

bool ChildProcess::write_all(std::string_view bytes) {
  while (!bytes.empty()) {
    if (to_child_ < 0) return false;
    ssize_t n = ::write(to_child_, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::optional<std::string> ChildProcess::read_some(std::chrono::milliseconds timeout) {
  if (from_child_ < 0) return std::string();
  pollfd fd{from_child_, POLLIN, 0};
  int ready;
  do {
    ready = ::poll(&fd, 1, static_cast<int>(timeout.count()));
  } while (ready < 0 && errno == EINTR);
  if (ready == 0) return std::nullopt;
  char buf[8192];
  ssize_t n;
  do {
    n = ::read(from_child_, buf, sizeof buf);
  } while (n < 0 && errno == EINTR);
  if (n <= 0) return std::string();
  return std::string(buf, static_cast<std::size_t>(n));
}

bool ChildProcess::running() {
  if (reaped_) return false;
  return !has_exited(pid_);
}

void ChildProcess::terminate() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0 && !reaped_) {
    kill_group(pid_);
    reap(pid_);
    reaped_ = true;
  }
}

}  // namespace rocq::backend
