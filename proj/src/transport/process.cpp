#include "dockhand/transport/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <algorithm>
#include <cstring>
#include <utility>

extern char** environ;

namespace dockhand::transport {

namespace {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Capture {
  std::string data;
  bool truncated = false;

  void append(const char* buf, std::size_t n, std::size_t cap) {
    if (data.size() >= cap) {
      truncated = truncated || n > 0;
      return;
    }
    auto room = cap - data.size();
    if (n > room) {
      data.append(buf, room);
      truncated = true;
    } else {
      data.append(buf, n);
    }
  }

  std::string finish(std::size_t cap) && {
    if (truncated) data += "\n[output truncated at " + std::to_string(cap) + " bytes]\n";
    return std::move(data);
  }
};

std::vector<std::string> build_environment(const std::map<std::string, std::string>& overrides) {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry{*e};
    auto eq = entry.find('=');
    auto name = entry.substr(0, eq);
    if (!overrides.contains(std::string(name))) env.emplace_back(entry);
  }
  for (const auto& [k, v] : overrides) env.push_back(k + "=" + v);
  return env;
}

std::vector<char*> as_cstrings(std::vector<std::string>& strings) {
  std::vector<char*> out;
  out.reserve(strings.size() + 1);
  for (auto& s : strings) out.push_back(s.data());
  out.push_back(nullptr);
  return out;
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace

ProcessOutcome run_process(const ProcessOptions& options) {
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  const auto deadline = started + options.timeout;
  ProcessOutcome outcome;

  auto fail = [&](const std::string& why) {
    outcome.spawn_failed = true;
    outcome.exit_code = 127;
    outcome.err = why;
    outcome.duration = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - started);
    return outcome;
  };

  if (options.argv.empty()) return fail("empty argument vector");

  int out_pipe[2], err_pipe[2];
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) return fail(std::string("pipe: ") + std::strerror(errno));
  Fd out_r{out_pipe[0]}, out_w{out_pipe[1]};
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) return fail(std::string("pipe: ") + std::strerror(errno));
  Fd err_r{err_pipe[0]}, err_w{err_pipe[1]};

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, out_w.get(), 1);
  posix_spawn_file_actions_adddup2(&actions, err_w.get(), 2);

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF);
  posix_spawnattr_setpgroup(&attr, 0);
  sigset_t empty_mask, default_signals;
  sigemptyset(&empty_mask);
  posix_spawnattr_setsigmask(&attr, &empty_mask);
  sigemptyset(&default_signals);
  sigaddset(&default_signals, SIGPIPE);
  posix_spawnattr_setsigdefault(&attr, &default_signals);

  auto argv_strings = options.argv;
  auto env_strings = build_environment(options.env);
  auto argv = as_cstrings(argv_strings);
  auto envp = as_cstrings(env_strings);

  pid_t pid = -1;
  int rc = ::posix_spawnp(&pid, argv[0], &actions, &attr, argv.data(), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) return fail("cannot execute " + options.argv[0] + ": " + std::strerror(rc));

  out_w.reset();
  err_w.reset();

  Capture out, err;
  char buf[65536];
  bool out_open = true, err_open = true;
  while (out_open || err_open) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    if (remaining <= 0) {
      outcome.timed_out = true;
      break;
    }
    pollfd fds[2];
    nfds_t n = 0;
    if (out_open) fds[n++] = {out_r.get(), POLLIN, 0};
    if (err_open) fds[n++] = {err_r.get(), POLLIN, 0};
    int ready = ::poll(fds, n, static_cast<int>(std::min<long long>(remaining, 1000)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (nfds_t i = 0; i < n; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      bool is_out = fds[i].fd == out_r.get();
      auto got = ::read(fds[i].fd, buf, sizeof buf);
      if (got > 0) {
        (is_out ? out : err).append(buf, static_cast<std::size_t>(got), options.output_cap);
      } else if (got == 0 || errno != EINTR) {
        (is_out ? out_open : err_open) = false;
      }
    }
  }

  int status = 0;
  if (outcome.timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, &status, 0);
  } else {
    // Streams are closed; the child may still be exiting.
    while (true) {
      auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
      pid_t r = ::waitpid(pid, &status, WNOHANG);
      if (r == pid) break;
      if (r < 0 && errno != EINTR) break;
      if (remaining <= 0) {
        outcome.timed_out = true;
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        break;
      }
      ::usleep(1000);
    }
  }

  outcome.exit_code = outcome.timed_out ? 128 + SIGKILL : decode_status(status);
  outcome.out = std::move(out).finish(options.output_cap);
  outcome.err = std::move(err).finish(options.output_cap);
  outcome.duration = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - started);
  return outcome;
}

}  // namespace dockhand::transport
