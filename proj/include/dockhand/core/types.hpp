#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace dockhand::core {

enum class TransportKind { ssh, http_agent, local };

std::string_view to_string(TransportKind kind);
std::optional<TransportKind> parse_transport_kind(std::string_view text);

enum class DeviceStatus { unknown, reachable, unreachable };

std::string_view to_string(DeviceStatus status);
std::optional<DeviceStatus> parse_device_status(std::string_view text);

/// UTC wall-clock instant with microsecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

Timestamp now_utc();

/// ISO-8601 form, e.g. "2026-10-15T08:30:00.123456Z".
std::string format_timestamp(Timestamp ts);
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Opaque device identifier: 32 lowercase hex characters.
class DeviceId {
 public:
  DeviceId() = default;
  explicit DeviceId(std::string value) : value_(std::move(value)) {}

  static DeviceId generate();
  static bool is_well_formed(std::string_view text);

  const std::string& str() const { return value_; }

  auto operator<=>(const DeviceId&) const = default;

 private:
  std::string value_;
};

struct DeviceRecord {
  DeviceId id;
  std::string name;
  std::string address;
  std::uint16_t port = 0;
  TransportKind transport = TransportKind::ssh;
  Timestamp created_at{};
  DeviceStatus last_status = DeviceStatus::unknown;

  bool operator==(const DeviceRecord&) const = default;
};

struct SshPassword {
  std::string username;
  std::string password;
};

struct SshKey {
  std::string username;
  std::string private_key;
  std::optional<std::string> passphrase;
};

struct AgentKey {
  std::string secret;
};

struct NoCredentials {};

/// Held for the duration of one request; never serialized to the device store.
using Credentials = std::variant<NoCredentials, SshPassword, SshKey, AgentKey>;

std::string_view credential_kind(const Credentials& creds);

inline constexpr std::int64_t kDefaultExecTimeoutMs = 30'000;

struct CommandRequest {
  std::string raw;
  bool validated = false;
  std::int64_t timeout_ms = kDefaultExecTimeoutMs;
};

struct CommandResult {
  int exit_code = 0;
  std::string out;
  std::string err;
  std::int64_t duration_ms = 0;
  TransportKind transport = TransportKind::local;

  bool operator==(const CommandResult&) const = default;
};

/// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string to_valid_utf8(std::string_view bytes);

}  // namespace dockhand::core
