#pragma once

#include <cstdint>
#include <string>
#include <string_view>

// Wire protocol shared by the agent and the http_agent transport.
namespace dockhand::agent::protocol {

inline constexpr std::string_view kHealthPath = "/api/v1/health";
inline constexpr std::string_view kExecPath = "/api/v1/exec";
inline constexpr std::string_view kKeyHeader = "X-Agent-Key";
inline constexpr std::string_view kVersion = "dockhand-agent 1.0";

inline constexpr std::int64_t kDefaultTimeoutMs = 30'000;
inline constexpr std::int64_t kMaxTimeoutMs = 60'000;

struct ExecEnvelopeRequest {
  std::string command;
  std::int64_t timeout_ms = kDefaultTimeoutMs;
};

struct ExecEnvelopeResponse {
  int exit_code = 0;
  std::string stdout_text;
  std::string stderr_text;
  std::int64_t duration_ms = 0;

  bool operator==(const ExecEnvelopeResponse&) const = default;
};

}  // namespace dockhand::agent::protocol
