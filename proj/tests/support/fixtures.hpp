#pragma once

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include <httplib.h>

#include <json.hpp>

#include "support/temp_dir.hpp"

#include "dockhand/agent/agent.hpp"
#include "dockhand/controller/controller.hpp"
#include "dockhand/mock/engine.hpp"
#include "dockhand/transport/provider.hpp"

#ifndef DOCKHAND_MOCKDOCKER_BIN
#error "DOCKHAND_MOCKDOCKER_BIN must point at the mockdocker executable"
#endif

namespace dockhand::testing {

inline const std::string kMockDocker = DOCKHAND_MOCKDOCKER_BIN;

/// A loopback port with nothing listening on it.
inline int closed_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

inline transport::LocalConfig local_config(const std::filesystem::path& state) {
  return {kMockDocker, {{mock::kStateEnv, state.string()}}};
}

/// Agent on an ephemeral loopback port serving the mock engine.
struct AgentFixture {
  explicit AgentFixture(const std::filesystem::path& state, std::string key = "test-agent-key",
                        std::size_t max_concurrency = 16, bool reject_when_busy = false) {
    agent::AgentConfig cfg;
    cfg.bind_host = "127.0.0.1";
    cfg.port = 0;
    cfg.key = std::move(key);
    cfg.docker_bin = kMockDocker;
    cfg.env = {{mock::kStateEnv, state.string()}};
    cfg.max_concurrency = max_concurrency;
    cfg.reject_when_busy = reject_when_busy;
    agent = std::make_unique<agent::Agent>(cfg);
    port = agent->start();
  }

  std::unique_ptr<agent::Agent> agent;
  int port = 0;
};

/// Wraps another provider and counts connect() calls.
class SpyTransports final : public transport::TransportProvider {
 public:
  explicit SpyTransports(std::shared_ptr<transport::TransportProvider> inner) : inner_(std::move(inner)) {}

  transport::Transport* find(core::TransportKind kind) override {
    auto* t = inner_->find(kind);
    if (!t) return nullptr;
    auto& slot = spies_[static_cast<int>(kind)];
    if (!slot) slot = std::make_unique<Spy>(*t, connects_);
    return slot.get();
  }

  int connects() const { return connects_.load(); }

 private:
  class Spy final : public transport::Transport {
   public:
    Spy(transport::Transport& inner, std::atomic<int>& counter) : inner_(inner), counter_(counter) {}
    core::TransportKind kind() const override { return inner_.kind(); }
    std::unique_ptr<transport::Session> connect(const transport::Endpoint& ep, const core::Credentials& c) override {
      ++counter_;
      return inner_.connect(ep, c);
    }
    transport::ProbeStatus probe(const transport::Endpoint& ep, const core::Credentials& c) override {
      ++counter_;
      return inner_.probe(ep, c);
    }

   private:
    transport::Transport& inner_;
    std::atomic<int>& counter_;
  };

  std::shared_ptr<transport::TransportProvider> inner_;
  std::unique_ptr<Spy> spies_[3];
  std::atomic<int> connects_{0};
};

inline std::shared_ptr<transport::StandardTransports> standard_transports(const std::filesystem::path& local_state) {
  auto ssh = transport::SshConfig::defaults();
  return std::make_shared<transport::StandardTransports>(ssh, transport::HttpAgentConfig{},
                                                         local_config(local_state));
}

/// Controller on an ephemeral loopback port with the local transport enabled.
struct ControllerFixture {
  ControllerFixture(std::shared_ptr<transport::TransportProvider> transports,
                    std::optional<std::filesystem::path> store = std::nullopt, bool cache_credentials = false) {
    controller::ControllerConfig cfg;
    cfg.port = 0;
    cfg.allow_local_transport = true;
    cfg.store_path = std::move(store);
    cfg.cache_credentials = cache_credentials;
    ctl = std::make_unique<controller::Controller>(cfg, std::move(transports));
    port = ctl->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(90, 0);
  }

  nlohmann::json add_device(const std::string& address, int port_, const std::string& transport) {
    auto res = client->Post("/api/devices",
                            nlohmann::json{{"name", "t"}, {"address", address}, {"port", port_}, {"transport", transport}}.dump(),
                            "application/json");
    if (!res || res->status != 201) throw std::runtime_error("add_device failed");
    return nlohmann::json::parse(res->body);
  }

  std::unique_ptr<controller::Controller> ctl;
  int port = 0;
  std::unique_ptr<httplib::Client> client;
};

inline nlohmann::json agent_credentials(const std::string& key) { return {{"type", "agent_key"}, {"key", key}}; }

}  // namespace dockhand::testing
