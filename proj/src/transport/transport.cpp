#include "dockhand/transport/transport.hpp"

#include <variant>

namespace dockhand::transport {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::auth_failed: return "auth_failed";
    case ErrorKind::unreachable: return "unreachable";
    case ErrorKind::timeout: return "timeout";
    case ErrorKind::protocol_error: return "protocol_error";
    case ErrorKind::command_rejected_remotely: return "command_rejected_remotely";
    case ErrorKind::internal: return "internal";
  }
  return "internal";
}

core::CommandResult Session::exec(const core::CommandRequest& request) {
  if (!open_) throw TransportError(ErrorKind::protocol_error, "session is closed");
  if (!request.validated) throw TransportError(ErrorKind::internal, "refusing to execute an unvalidated command");
  if (request.timeout_ms <= 0) throw TransportError(ErrorKind::internal, "timeout_ms must be positive");
  try {
    return do_exec(request);
  } catch (const TransportError&) {
    throw;
  } catch (const std::exception& e) {
    throw TransportError(ErrorKind::internal, e.what());
  }
}

void Session::close() {
  if (!open_) return;
  open_ = false;
  try {
    do_close();
  } catch (...) {
  }
}

ProbeStatus Transport::probe(const Endpoint& endpoint, const core::Credentials& credentials) {
  try {
    auto session = connect(endpoint, credentials);
    session->close();
    return ProbeStatus::ok();
  } catch (const TransportError& e) {
    return ProbeStatus::failed(e.kind(), e.detail());
  } catch (const std::exception& e) {
    return ProbeStatus::failed(ErrorKind::internal, e.what());
  }
}

bool credentials_match(core::TransportKind kind, const core::Credentials& credentials) {
  switch (kind) {
    case core::TransportKind::ssh:
      return std::holds_alternative<core::SshPassword>(credentials) ||
             std::holds_alternative<core::SshKey>(credentials);
    case core::TransportKind::http_agent:
      return std::holds_alternative<core::AgentKey>(credentials) ||
             std::holds_alternative<core::NoCredentials>(credentials);
    case core::TransportKind::local:
      return std::holds_alternative<core::NoCredentials>(credentials);
  }
  return false;
}

}  // namespace dockhand::transport
