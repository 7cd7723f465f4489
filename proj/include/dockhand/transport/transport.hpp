#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "dockhand/core/types.hpp"

namespace dockhand::transport {

struct Endpoint {
  std::string address;
  std::uint16_t port = 0;
  core::TransportKind transport = core::TransportKind::ssh;

  static Endpoint of(const core::DeviceRecord& device) { return {device.address, device.port, device.transport}; }

  bool operator==(const Endpoint&) const = default;
};

enum class ErrorKind { auth_failed, unreachable, timeout, protocol_error, command_rejected_remotely, internal };

std::string_view to_string(ErrorKind kind);

/// The only error type transports let escape. auth_failed is raised only after
/// a connection was established, unreachable only before.
class TransportError : public std::runtime_error {
 public:
  TransportError(ErrorKind kind, const std::string& detail) : std::runtime_error(detail), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  std::string detail() const { return what(); }

 private:
  ErrorKind kind_;
};

struct ProbeStatus {
  bool reachable = false;
  std::optional<ErrorKind> error;
  std::string detail;

  static ProbeStatus ok() { return {true, std::nullopt, {}}; }
  static ProbeStatus failed(ErrorKind kind, std::string detail) { return {false, kind, std::move(detail)}; }
};

/// A connection bound to one endpoint. Not shareable across threads.
class Session {
 public:
  explicit Session(Endpoint endpoint) : endpoint_(std::move(endpoint)), opened_at_(core::now_utc()) {}
  virtual ~Session() = default;

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const Endpoint& endpoint() const { return endpoint_; }
  core::Timestamp opened_at() const { return opened_at_; }
  bool is_open() const { return open_; }

  /// Refuses unvalidated requests (internal) and closed sessions
  /// (protocol_error) before any I/O.
  core::CommandResult exec(const core::CommandRequest& request);

  /// Idempotent.
  void close();

 protected:
  virtual core::CommandResult do_exec(const core::CommandRequest& request) = 0;
  virtual void do_close() {}

 private:
  Endpoint endpoint_;
  core::Timestamp opened_at_;
  bool open_ = true;
};

class Transport {
 public:
  virtual ~Transport() = default;

  virtual core::TransportKind kind() const = 0;

  /// Throws TransportError on failure.
  virtual std::unique_ptr<Session> connect(const Endpoint& endpoint, const core::Credentials& credentials) = 0;

  /// Liveness check that never throws. Default: connect, then close.
  virtual ProbeStatus probe(const Endpoint& endpoint, const core::Credentials& credentials);
};

/// Looks up the transport for a device's kind. Returns nullptr when the kind
/// is not enabled (e.g. local outside dev/test mode).
class TransportProvider {
 public:
  virtual ~TransportProvider() = default;
  virtual Transport* find(core::TransportKind kind) = 0;
};

/// True when the credential variant is usable with the transport kind.
bool credentials_match(core::TransportKind kind, const core::Credentials& credentials);

}  // namespace dockhand::transport
