#include "dockhand/agent/agent.hpp"

#include <httplib.h>

#include <json.hpp>

#include "dockhand/core/log.hpp"

namespace dockhand::agent {

using nlohmann::json;
namespace proto = protocol;

bool key_matches(std::string_view presented, std::string_view secret) {
  // Runtime depends only on the presented length.
  unsigned char diff = presented.size() == secret.size() ? 0 : 1;
  for (std::size_t i = 0; i < presented.size(); ++i) {
    unsigned char s = secret.empty() ? 0 : static_cast<unsigned char>(secret[i % secret.size()]);
    diff |= static_cast<unsigned char>(presented[i]) ^ s;
  }
  return diff == 0 && !secret.empty();
}

namespace {

Reply error_reply(int status, json body) { return {status, body.dump()}; }

std::unique_ptr<httplib::Server> make_server(const AgentConfig& config) {
  if (config.tls_cert || config.tls_key) {
    if (!config.tls_cert || !config.tls_key) throw std::invalid_argument("TLS needs both a certificate and a key");
    auto server = std::make_unique<httplib::SSLServer>(config.tls_cert->c_str(), config.tls_key->c_str());
    if (!server->is_valid()) throw std::runtime_error("cannot load TLS certificate or key");
    return server;
  }
  return std::make_unique<httplib::Server>();
}

}  // namespace

Agent::Agent(AgentConfig config, Spawner spawner)
    : config_(std::move(config)),
      spawner_(std::move(spawner)),
      server_(make_server(config_)),
      slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.max_concurrency))) {
  if (config_.key.empty()) throw std::invalid_argument("agent key must be non-empty");
  install_routes();
}

Agent::~Agent() { stop(); }

Reply Agent::health() {
  return {200, json{{"status", "ok"}, {"version", proto::kVersion}}.dump()};
}

Reply Agent::handle_exec(std::string_view body) {
  auto doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return error_reply(400, {{"error", "malformed_body"}});
  auto cmd = doc.find("command");
  if (cmd == doc.end() || !cmd->is_string()) return error_reply(400, {{"error", "malformed_body"}});

  std::int64_t timeout_ms = proto::kDefaultTimeoutMs;
  if (auto t = doc.find("timeout_ms"); t != doc.end()) {
    if (!t->is_number_integer() || t->get<std::int64_t>() <= 0)
      return error_reply(400, {{"error", "malformed_body"}});
    timeout_ms = std::min(t->get<std::int64_t>(), proto::kMaxTimeoutMs);
  }

  auto verdict = core::validate_command(cmd->get<std::string>(), config_.policy);
  if (!verdict)
    return error_reply(422, {{"error", "command_rejected"}, {"reason", core::to_string(verdict.reason())}});

  if (config_.reject_when_busy) {
    if (!slots_.try_acquire()) return error_reply(429, {{"error", "busy"}});
  } else {
    slots_.acquire();
  }
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots_};

  transport::ProcessOptions opts;
  opts.argv = core::split_command(verdict.normalized());
  if (!opts.argv.empty() && opts.argv[0] == "docker") opts.argv[0] = config_.docker_bin;
  opts.env = config_.env;
  opts.timeout = std::chrono::milliseconds(timeout_ms);

  ++spawn_count_;
  auto outcome = spawner_(opts);
  if (outcome.timed_out) return error_reply(408, {{"error", "timeout"}});
  if (outcome.spawn_failed) log::error("agent: " + outcome.err);

  json envelope = {{"exit_code", outcome.exit_code},
                   {"stdout", core::to_valid_utf8(outcome.out)},
                   {"stderr", core::to_valid_utf8(outcome.err)},
                   {"duration_ms", std::max<std::int64_t>(0, outcome.duration.count())}};
  return {200, envelope.dump()};
}

void Agent::install_routes() {
  auto& srv = *server_;
  auto pool_size = config_.max_concurrency + 8;
  srv.new_task_queue = [pool_size] { return new httplib::ThreadPool(pool_size); };
  srv.set_payload_max_length(config_.max_body_bytes);

  // The key is checked from the headers alone, before any body is read.
  srv.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (req.path != proto::kExecPath || req.method != "POST") return httplib::Server::HandlerResponse::Unhandled;
    auto presented = req.get_header_value(std::string(proto::kKeyHeader));
    if (key_matches(presented, config_.key)) return httplib::Server::HandlerResponse::Unhandled;
    res.status = 401;
    res.set_header("Connection", "close");
    res.set_content(json{{"error", "unauthorized"}}.dump(), "application/json");
    return httplib::Server::HandlerResponse::Handled;
  });

  srv.Get(std::string(proto::kHealthPath), [](const httplib::Request&, httplib::Response& res) {
    auto reply = health();
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });

  srv.Post(std::string(proto::kExecPath), [this](const httplib::Request& req, httplib::Response& res) {
    auto reply = handle_exec(req.body);
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
    log::info("agent: POST " + std::string(proto::kExecPath) + " -> " + std::to_string(reply.status));
  });
}

int Agent::bind() {
  if (port_ > 0) return port_;
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.bind_host);
  } else {
    port_ = server_->bind_to_port(config_.bind_host, config_.port) ? config_.port : -1;
  }
  if (port_ <= 0) throw std::runtime_error("agent cannot bind " + config_.bind_host + ":" + std::to_string(config_.port));
  return port_;
}

void Agent::serve() { server_->listen_after_bind(); }

int Agent::start() {
  int p = bind();
  thread_ = std::thread([this] { serve(); });
  server_->wait_until_ready();
  return p;
}

void Agent::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace dockhand::agent
