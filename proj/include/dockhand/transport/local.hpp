#pragma once

#include <map>
#include <string>

#include "dockhand/transport/transport.hpp"

namespace dockhand::transport {

struct LocalConfig {
  /// Substituted for the leading "docker" word.
  std::string docker_bin = "docker";
  std::map<std::string, std::string> env;
};

/// Runs commands as child processes on this machine with no shell. Dev/test only.
class LocalTransport final : public Transport {
 public:
  explicit LocalTransport(LocalConfig config = {}) : config_(std::move(config)) {}

  core::TransportKind kind() const override { return core::TransportKind::local; }
  std::unique_ptr<Session> connect(const Endpoint& endpoint, const core::Credentials& credentials) override;

 private:
  LocalConfig config_;
};

}  // namespace dockhand::transport
