#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

#include "dockhand/controller/serial_executor.hpp"
#include "dockhand/core/credential_cache.hpp"
#include "dockhand/core/registry.hpp"
#include "dockhand/core/validation.hpp"
#include "dockhand/transport/transport.hpp"

namespace httplib {
class Server;
struct Request;
struct Response;
}  // namespace httplib

namespace dockhand::controller {

struct ApiError {
  int http_status = 500;
  std::string code;
  std::string detail;

  nlohmann::json to_json() const;
};

/// validation_rejected 422, auth_failed 401, unreachable/timeout/protocol_error
/// 502, command_rejected_remotely 422 (validation_rejected), internal 500.
ApiError map_transport_error(transport::ErrorKind kind, std::string detail);

struct ControllerConfig {
  std::string bind_host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> store_path;
  bool allow_local_transport = false;
  std::optional<std::filesystem::path> ui_dir;
  core::ValidationPolicy policy = core::ValidationPolicy::defaults();
  /// Longest a request may wait in its device queue before starting.
  std::chrono::milliseconds queue_item_timeout{30'000};
  bool cache_credentials = false;
};

inline constexpr int kDefaultLogTail = 100;
inline constexpr int kMaxLogTail = 10'000;

/// Operator-facing REST service.
class Controller {
 public:
  Controller(ControllerConfig config, std::shared_ptr<transport::TransportProvider> transports);
  ~Controller();

  Controller(const Controller&) = delete;
  Controller& operator=(const Controller&) = delete;

  int bind();
  void serve();
  /// bind() + serve() on a background thread; returns the bound port.
  int start();
  void stop();
  int port() const { return port_; }

  core::RegistryStore& registry() { return *registry_; }

 private:
  void install_routes();
  void persist();

  /// Runs fn on the device's FIFO executor and waits for it.
  core::CommandResult run_serialized(const core::DeviceId& id, std::function<core::CommandResult()> fn);
  void forget_device(const core::DeviceId& id);

  core::Credentials resolve_credentials(const core::DeviceRecord& device, const httplib::Request& req,
                                        const nlohmann::json* body);
  core::CommandResult run_command(const core::DeviceRecord& device, const core::Credentials& creds,
                                  const std::string& command, std::int64_t timeout_ms);

  ControllerConfig config_;
  std::shared_ptr<transport::TransportProvider> transports_;
  std::unique_ptr<core::RegistryStore> registry_;
  std::unique_ptr<httplib::Server> server_;
  core::CredentialCache credential_cache_;

  std::mutex persist_mutex_;
  std::mutex executors_mutex_;
  std::map<core::DeviceId, std::shared_ptr<SerialExecutor>> executors_;

  std::thread thread_;
  int port_ = -1;
};

}  // namespace dockhand::controller
