#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <thread>

#include "dockhand/agent/protocol.hpp"
#include "dockhand/core/validation.hpp"
#include "dockhand/transport/process.hpp"

namespace httplib {
class Server;
}

namespace dockhand::agent {

struct AgentConfig {
  std::string bind_host = "0.0.0.0";
  int port = 9090;
  /// Shared secret; must be non-empty.
  std::string key;
  std::string docker_bin = "docker";
  std::size_t max_concurrency = 16;
  /// Over the limit: queue (default) or answer 429.
  bool reject_when_busy = false;
  std::optional<std::string> tls_cert;
  std::optional<std::string> tls_key;
  /// Extra environment for spawned commands.
  std::map<std::string, std::string> env;
  std::size_t max_body_bytes = 1024 * 1024;
  core::ValidationPolicy policy = core::ValidationPolicy::defaults();
};

using Spawner = std::function<transport::ProcessOutcome(const transport::ProcessOptions&)>;

struct Reply {
  int status = 200;
  std::string body;
};

/// Constant-time comparison of a presented key with the secret.
bool key_matches(std::string_view presented, std::string_view secret);

/// The host-side command service.
class Agent {
 public:
  explicit Agent(AgentConfig config, Spawner spawner = transport::run_process);
  ~Agent();

  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  /// Binds the listening socket; port 0 picks a free one. Returns the bound port.
  int bind();
  /// Serves until stop(). Requires bind().
  void serve();
  /// bind() + serve() on a background thread.
  int start();
  void stop();

  int port() const { return port_; }

  /// Processes actually spawned so far.
  std::uint64_t spawn_count() const { return spawn_count_.load(); }

  static Reply health();
  /// Body of POST /api/v1/exec, after authentication.
  Reply handle_exec(std::string_view body);

 private:
  void install_routes();

  AgentConfig config_;
  Spawner spawner_;
  std::unique_ptr<httplib::Server> server_;
  std::counting_semaphore<> slots_;
  std::atomic<std::uint64_t> spawn_count_{0};
  std::thread thread_;
  int port_ = -1;
};

}  // namespace dockhand::agent
