#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "dockhand/transport/transport.hpp"

namespace dockhand::transport {

struct HttpAgentConfig {
  bool use_tls = false;
  std::optional<std::string> ca_cert_path;
  bool verify_tls = true;
  std::chrono::milliseconds connect_timeout{10'000};
};

/// Client side of the agent wire protocol.
///
/// connect probes the health endpoint, then proves the key with an empty exec
/// body: the agent checks the key before parsing, so 400 means accepted and
/// 401 means rejected. No process is spawned either way.
class HttpAgentTransport final : public Transport {
 public:
  explicit HttpAgentTransport(HttpAgentConfig config = {}) : config_(std::move(config)) {}

  core::TransportKind kind() const override { return core::TransportKind::http_agent; }
  std::unique_ptr<Session> connect(const Endpoint& endpoint, const core::Credentials& credentials) override;

 private:
  HttpAgentConfig config_;
};

}  // namespace dockhand::transport
