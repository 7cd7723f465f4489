#pragma once

#include <memory>
#include <optional>

#include "dockhand/transport/http_agent.hpp"
#include "dockhand/transport/local.hpp"
#include "dockhand/transport/ssh.hpp"

namespace dockhand::transport {

/// The production transport set. Local is present only when configured.
class StandardTransports final : public TransportProvider {
 public:
  StandardTransports(SshConfig ssh, HttpAgentConfig http, std::optional<LocalConfig> local)
      : ssh_(std::move(ssh)), http_(std::move(http)) {
    if (local) local_ = std::make_unique<LocalTransport>(std::move(*local));
  }

  Transport* find(core::TransportKind kind) override {
    switch (kind) {
      case core::TransportKind::ssh: return &ssh_;
      case core::TransportKind::http_agent: return &http_;
      case core::TransportKind::local: return local_.get();
    }
    return nullptr;
  }

 private:
  SshTransport ssh_;
  HttpAgentTransport http_;
  std::unique_ptr<LocalTransport> local_;
};

}  // namespace dockhand::transport
