#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace dockhand::transport {

inline constexpr std::size_t kOutputCapBytes = 4 * 1024 * 1024;

struct ProcessOptions {
  /// argv[0] is resolved through PATH. No shell is involved.
  std::vector<std::string> argv;
  /// Merged over the current environment.
  std::map<std::string, std::string> env;
  std::chrono::milliseconds timeout{30'000};
  std::size_t output_cap = kOutputCapBytes;
};

struct ProcessOutcome {
  int exit_code = -1;  // 128 + signal when killed; 127 when spawning failed
  std::string out;
  std::string err;
  bool timed_out = false;
  bool spawn_failed = false;
  std::chrono::milliseconds duration{0};
};

/// Runs argv as a child process in its own process group, capturing stdout
/// and stderr. On timeout the whole group is killed. Each stream is capped at
/// output_cap bytes; an over-long stream ends with a truncation marker line.
ProcessOutcome run_process(const ProcessOptions& options);

}  // namespace dockhand::transport
