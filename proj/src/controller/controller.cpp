#include "dockhand/controller/controller.hpp"

#include <httplib.h>

#include <charconv>
#include <future>

#include "dockhand/controller/pipeline.hpp"
#include "dockhand/core/json_codec.hpp"
#include "dockhand/core/listing.hpp"
#include "dockhand/core/log.hpp"

namespace dockhand::controller {

using nlohmann::json;
using transport::ErrorKind;
using transport::TransportError;

json ApiError::to_json() const { return {{"http_status", http_status}, {"code", code}, {"detail", detail}}; }

ApiError map_transport_error(ErrorKind kind, std::string detail) {
  switch (kind) {
    case ErrorKind::auth_failed: return {401, "auth_failed", std::move(detail)};
    case ErrorKind::unreachable: return {502, "unreachable", std::move(detail)};
    case ErrorKind::timeout: return {502, "timeout", std::move(detail)};
    case ErrorKind::protocol_error: return {502, "protocol_error", std::move(detail)};
    case ErrorKind::command_rejected_remotely: return {422, "validation_rejected", std::move(detail)};
    case ErrorKind::internal: return {500, "internal", std::move(detail)};
  }
  return {500, "internal", std::move(detail)};
}

namespace {

class BadRequest : public std::runtime_error {
 public:
  BadRequest(std::string code, const std::string& detail) : std::runtime_error(detail), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& err, const json& extra = json::object()) {
  auto body = err.to_json();
  for (auto it = extra.begin(); it != extra.end(); ++it) body[it.key()] = it.value();
  send_json(res, err.http_status, body);
}

// Runs a handler body, translating every failure into an ApiError response.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationRejected& e) {
    send_error(res, {422, "validation_rejected", e.what()}, {{"reason", e.reason()}});
  } catch (const TransportError& e) {
    send_error(res, map_transport_error(e.kind(), e.detail()));
  } catch (const core::RegistryError& e) {
    if (e.code() == core::RegistryError::Code::not_found) send_error(res, {404, "not_found", e.what()});
    else if (e.code() == core::RegistryError::Code::io_error || e.code() == core::RegistryError::Code::corrupt_store)
      send_error(res, {500, "internal", e.what()});
    else send_error(res, {400, std::string(core::to_string(e.code())), e.what()});
  } catch (const core::ParseError& e) {
    send_error(res, {502, "protocol_error", std::string("unparseable engine output: ") + e.what()});
  } catch (const BadRequest& e) {
    send_error(res, {400, e.code(), e.what()});
  } catch (const std::exception& e) {
    send_error(res, {500, "internal", e.what()});
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto doc = json::parse(req.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw BadRequest("validation_rejected", "body must be a JSON object");
  return doc;
}

core::DeviceId device_id_from(const std::string& text) {
  if (!core::DeviceId::is_well_formed(text))
    throw core::RegistryError(core::RegistryError::Code::not_found, "no such device: " + text);
  return core::DeviceId{text};
}

core::Credentials credentials_from_headers(const httplib::Request& req) {
  if (req.has_header("X-Agent-Key")) return core::AgentKey{req.get_header_value("X-Agent-Key")};
  if (req.has_header("X-SSH-Username")) {
    auto user = req.get_header_value("X-SSH-Username");
    if (user.empty()) throw BadRequest("validation_rejected", "ssh username must be non-empty");
    if (req.has_header("X-SSH-Password")) return core::SshPassword{user, req.get_header_value("X-SSH-Password")};
    throw BadRequest("validation_rejected", "X-SSH-Username requires X-SSH-Password");
  }
  return core::NoCredentials{};
}

std::int64_t timeout_from(const json& body) {
  auto it = body.find("timeout_ms");
  if (it == body.end()) return core::kDefaultExecTimeoutMs;
  if (!it->is_number_integer() || it->get<std::int64_t>() <= 0)
    throw BadRequest("validation_rejected", "timeout_ms must be a positive integer");
  return it->get<std::int64_t>();
}

}  // namespace

Controller::Controller(ControllerConfig config, std::shared_ptr<transport::TransportProvider> transports)
    : config_(std::move(config)), transports_(std::move(transports)), server_(std::make_unique<httplib::Server>()) {
  if (config_.store_path && std::filesystem::exists(*config_.store_path)) {
    registry_.reset(new core::RegistryStore(core::RegistryStore::load(*config_.store_path, config_.allow_local_transport)));
  } else {
    registry_ = std::make_unique<core::RegistryStore>(config_.allow_local_transport);
  }
  install_routes();
}

Controller::~Controller() {
  stop();
  std::lock_guard lock(executors_mutex_);
  executors_.clear();
}

void Controller::persist() {
  if (!config_.store_path) return;
  std::lock_guard lock(persist_mutex_);
  registry_->save(*config_.store_path);
}

core::CommandResult Controller::run_serialized(const core::DeviceId& id, std::function<core::CommandResult()> fn) {
  std::shared_ptr<SerialExecutor> executor;
  {
    std::lock_guard lock(executors_mutex_);
    auto& slot = executors_[id];
    if (!slot) slot = std::make_shared<SerialExecutor>(config_.queue_item_timeout);
    executor = slot;
  }
  auto promise = std::make_shared<std::promise<core::CommandResult>>();
  auto future = promise->get_future();
  executor->submit(
      [promise, fn = std::move(fn)] {
        try {
          promise->set_value(fn());
        } catch (...) {
          promise->set_exception(std::current_exception());
        }
      },
      [promise] {
        promise->set_exception(
            std::make_exception_ptr(TransportError(ErrorKind::timeout, "request waited too long in the device queue")));
      });
  return future.get();
}

void Controller::forget_device(const core::DeviceId& id) {
  std::shared_ptr<SerialExecutor> executor;
  {
    std::lock_guard lock(executors_mutex_);
    auto it = executors_.find(id);
    if (it == executors_.end()) return;
    executor = std::move(it->second);
    executors_.erase(it);
  }
  credential_cache_.forget(id);
}

core::Credentials Controller::resolve_credentials(const core::DeviceRecord& device, const httplib::Request& req,
                                                  const json* body) {
  core::Credentials creds = core::NoCredentials{};
  try {
    if (body && body->contains("credentials")) creds = core::credentials_from_json(body->at("credentials"));
    else creds = credentials_from_headers(req);
  } catch (const std::invalid_argument& e) {
    throw BadRequest("validation_rejected", e.what());
  }
  if (config_.cache_credentials && device.transport != core::TransportKind::local) {
    if (std::holds_alternative<core::NoCredentials>(creds)) {
      if (auto cached = credential_cache_.get(device.id)) creds = *cached;
    }
  }
  if (!transport::credentials_match(device.transport, creds))
    throw BadRequest("validation_rejected", "credentials do not match the device transport " +
                                                std::string(core::to_string(device.transport)));
  return creds;
}

core::CommandResult Controller::run_command(const core::DeviceRecord& device, const core::Credentials& creds,
                                            const std::string& command, std::int64_t timeout_ms) {
  // Reject before queueing; the pipeline checks again before connecting.
  auto verdict = core::validate_command(command, config_.policy);
  if (!verdict) throw ValidationRejected(std::string(core::to_string(verdict.reason())));
  try {
    auto result = run_serialized(device.id, [&] {
      return execute_on_device(device, creds, command, timeout_ms, config_.policy, *transports_);
    });
    if (config_.cache_credentials && !std::holds_alternative<core::NoCredentials>(creds))
      credential_cache_.put(device.id, creds);
    return result;
  } catch (const TransportError& e) {
    if (e.kind() == ErrorKind::auth_failed) credential_cache_.forget(device.id);
    throw;
  }
}

void Controller::install_routes() {
  auto& srv = *server_;
  srv.new_task_queue = [] { return new httplib::ThreadPool(32); };

  srv.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    // Method, path and status only: headers and bodies may carry credentials.
    log::info("controller: " + req.method + " " + req.path + " -> " + std::to_string(res.status));
  });

  if (config_.ui_dir) srv.set_mount_point("/", config_.ui_dir->string());

  srv.Post("/api/devices", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = parse_body(req);
      auto str = [&](const char* key, const std::string& fallback) {
        auto it = body.find(key);
        if (it == body.end()) return fallback;
        if (!it->is_string()) throw BadRequest("validation_rejected", std::string(key) + " must be a string");
        return it->get<std::string>();
      };
      auto address = str("address", "");
      auto name = str("name", address);
      int port = 0;
      if (auto it = body.find("port"); it != body.end()) {
        if (!it->is_number_integer()) throw core::RegistryError(core::RegistryError::Code::invalid_port, "port must be an integer");
        auto p = it->get<std::int64_t>();
        port = (p < 1 || p > 65535) ? 0 : static_cast<int>(p);
      }
      auto kind = core::parse_transport_kind(str("transport", ""));
      if (!kind) throw core::RegistryError(core::RegistryError::Code::invalid_transport, "transport must be ssh, http_agent or local");
      auto rec = registry_->add(name, address, port, *kind);
      persist();
      send_json(res, 201, core::to_json(rec));
    });
  });

  srv.Get("/api/devices", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json arr = json::array();
      for (const auto& rec : registry_->list()) arr.push_back(core::to_json(rec));
      send_json(res, 200, arr);
    });
  });

  srv.Get(R"(/api/devices/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, core::to_json(registry_->get(device_id_from(req.matches[1])))); });
  });

  srv.Delete(R"(/api/devices/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto id = device_id_from(req.matches[1]);
      registry_->remove(id);
      forget_device(id);
      persist();
      res.status = 204;
    });
  });

  srv.Post(R"(/api/devices/([^/]+)/probe)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto device = registry_->get(device_id_from(req.matches[1]));
      auto body = parse_body(req);
      auto creds = resolve_credentials(device, req, &body);
      auto status = probe_device(device, creds, *transports_);
      try {
        registry_->set_status(device.id, status.reachable ? core::DeviceStatus::reachable
                                                          : core::DeviceStatus::unreachable);
        persist();
      } catch (const core::RegistryError&) {
        // removed concurrently
      }
      json out = {{"status", status.reachable ? "reachable" : "unreachable"}};
      if (status.error) {
        out["error_kind"] = transport::to_string(*status.error);
        out["detail"] = status.detail;
      }
      send_json(res, 200, out);
    });
  });

  srv.Post(R"(/api/devices/([^/]+)/exec)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto device = registry_->get(device_id_from(req.matches[1]));
      auto body = parse_body(req);
      auto cmd = body.find("command");
      if (cmd == body.end() || !cmd->is_string()) throw BadRequest("validation_rejected", "command is required");
      auto timeout_ms = timeout_from(body);
      auto verdict = core::validate_command(cmd->get<std::string>(), config_.policy);
      if (!verdict) throw ValidationRejected(std::string(core::to_string(verdict.reason())));
      auto creds = resolve_credentials(device, req, &body);
      send_json(res, 200, core::to_json(run_command(device, creds, cmd->get<std::string>(), timeout_ms)));
    });
  });

  srv.Get(R"(/api/devices/([^/]+)/(containers|images|volumes))",
          [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              auto device = registry_->get(device_id_from(req.matches[1]));
              std::string what = req.matches[2];
              auto kind = what == "containers" ? core::ListingKind::containers_all
                          : what == "images"   ? core::ListingKind::images
                                               : core::ListingKind::volumes;
              auto creds = resolve_credentials(device, req, nullptr);
              auto result = run_command(device, creds, core::build_listing_command(kind), core::kDefaultExecTimeoutMs);
              if (result.exit_code != 0)
                throw TransportError(ErrorKind::protocol_error,
                                     "listing exited with " + std::to_string(result.exit_code) + ": " + result.err);
              json arr = json::array();
              std::visit(
                  [&](const auto& records) {
                    for (const auto& r : records) arr.push_back(core::to_json(r));
                  },
                  core::parse_listing(kind, result.out));
              send_json(res, 200, arr);
            });
          });

  auto lifecycle = [this](const httplib::Request& req, httplib::Response& res, const std::string& verb) {
    guarded(res, [&] {
      auto device = registry_->get(device_id_from(req.matches[1]));
      std::string cid = req.matches[2];
      if (!core::is_valid_container_ref(cid))
        throw ValidationRejected("invalid_container_id");
      auto body = parse_body(req);
      auto creds = resolve_credentials(device, req, &body);
      send_json(res, 200, core::to_json(run_command(device, creds, "docker " + verb + " " + cid, timeout_from(body))));
    });
  };

  srv.Post(R"(/api/devices/([^/]+)/containers/([^/]+)/(start|stop|restart))",
           [lifecycle](const httplib::Request& req, httplib::Response& res) { lifecycle(req, res, req.matches[3]); });

  srv.Delete(R"(/api/devices/([^/]+)/containers/([^/]+))",
             [lifecycle](const httplib::Request& req, httplib::Response& res) { lifecycle(req, res, "rm"); });

  srv.Get(R"(/api/devices/([^/]+)/containers/([^/]+)/logs)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto device = registry_->get(device_id_from(req.matches[1]));
      std::string cid = req.matches[2];
      if (!core::is_valid_container_ref(cid)) throw ValidationRejected("invalid_container_id");
      int tail = kDefaultLogTail;
      if (req.has_param("tail")) {
        auto text = req.get_param_value("tail");
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), tail);
        if (ec != std::errc{} || p != text.data() + text.size() || tail < 0 || tail > kMaxLogTail)
          throw BadRequest("validation_rejected", "tail must be an integer in 0.." + std::to_string(kMaxLogTail));
      }
      auto creds = resolve_credentials(device, req, nullptr);
      auto result = run_command(device, creds, "docker logs --tail " + std::to_string(tail) + " " + cid,
                                core::kDefaultExecTimeoutMs);
      send_json(res, 200, {{"stdout", result.out}, {"stderr", result.err}, {"exit_code", result.exit_code}});
    });
  });
}

int Controller::bind() {
  if (port_ > 0) return port_;
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.bind_host);
  } else {
    port_ = server_->bind_to_port(config_.bind_host, config_.port) ? config_.port : -1;
  }
  if (port_ <= 0)
    throw std::runtime_error("controller cannot bind " + config_.bind_host + ":" + std::to_string(config_.port));
  return port_;
}

void Controller::serve() { server_->listen_after_bind(); }

int Controller::start() {
  int p = bind();
  thread_ = std::thread([this] { serve(); });
  server_->wait_until_ready();
  return p;
}

void Controller::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace dockhand::controller
