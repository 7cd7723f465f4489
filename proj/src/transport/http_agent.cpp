#include "dockhand/transport/http_agent.hpp"

#include <httplib.h>

#include <json.hpp>

#include "dockhand/agent/protocol.hpp"

namespace dockhand::transport {

namespace proto = agent::protocol;
using nlohmann::json;

namespace {

std::string base_url(const Endpoint& ep, bool tls) {
  std::string host = ep.address.find(':') != std::string::npos ? "[" + ep.address + "]" : ep.address;
  return std::string(tls ? "https://" : "http://") + host + ":" + std::to_string(ep.port);
}

template <typename Ms>
std::pair<time_t, time_t> split_ms(Ms ms) {
  auto count = std::chrono::duration_cast<std::chrono::milliseconds>(ms).count();
  return {static_cast<time_t>(count / 1000), static_cast<time_t>((count % 1000) * 1000)};
}

[[noreturn]] void throw_for(httplib::Error err, bool connected, std::chrono::milliseconds elapsed,
                            std::chrono::milliseconds read_timeout) {
  switch (err) {
    case httplib::Error::Connection:
    case httplib::Error::BindIPAddress:
    case httplib::Error::ProxyConnection:
      throw TransportError(ErrorKind::unreachable, "cannot connect to agent: " + httplib::to_string(err));
    case httplib::Error::ConnectionTimeout:
      throw TransportError(ErrorKind::timeout, "agent connect timed out");
    case httplib::Error::Read:
      if (elapsed >= read_timeout) throw TransportError(ErrorKind::timeout, "agent response timed out");
      throw TransportError(connected ? ErrorKind::protocol_error : ErrorKind::unreachable,
                           "agent closed the connection");
    case httplib::Error::SSLConnection:
    case httplib::Error::SSLServerVerification:
    case httplib::Error::SSLLoadingCerts:
      throw TransportError(ErrorKind::protocol_error, "TLS failure: " + httplib::to_string(err));
    default:
      throw TransportError(connected ? ErrorKind::protocol_error : ErrorKind::unreachable,
                           "agent request failed: " + httplib::to_string(err));
  }
}

class AgentSession final : public Session {
 public:
  AgentSession(Endpoint endpoint, std::unique_ptr<httplib::Client> client, std::optional<std::string> key)
      : Session(std::move(endpoint)), client_(std::move(client)), key_(std::move(key)) {}

 protected:
  core::CommandResult do_exec(const core::CommandRequest& request) override {
    auto started = std::chrono::steady_clock::now();
    auto read_timeout = std::chrono::milliseconds(request.timeout_ms + 1000);
    auto [sec, usec] = split_ms(read_timeout);
    client_->set_read_timeout(sec, usec);

    json body = {{"command", request.raw}, {"timeout_ms", request.timeout_ms}};
    auto res = client_->Post(std::string(proto::kExecPath), headers(), body.dump(), "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    if (!res) throw_for(res.error(), true, elapsed, read_timeout);

    switch (res->status) {
      case 200: break;
      case 401: throw TransportError(ErrorKind::auth_failed, "agent rejected the key");
      case 408: throw TransportError(ErrorKind::timeout, "command exceeded " + std::to_string(request.timeout_ms) + " ms");
      case 422: {
        auto doc = json::parse(res->body, nullptr, false);
        std::string reason = doc.is_object() ? doc.value("reason", "unknown") : "unknown";
        throw TransportError(ErrorKind::command_rejected_remotely, "agent refused the command: " + reason);
      }
      case 429: throw TransportError(ErrorKind::protocol_error, "agent is at its concurrency limit");
      default:
        throw TransportError(ErrorKind::protocol_error, "agent returned HTTP " + std::to_string(res->status));
    }

    auto doc = json::parse(res->body, nullptr, false);
    if (!doc.is_object()) throw TransportError(ErrorKind::protocol_error, "agent sent a malformed envelope");
    core::CommandResult result;
    try {
      result.exit_code = doc.at("exit_code").get<int>();
      result.out = doc.at("stdout").get<std::string>();
      result.err = doc.at("stderr").get<std::string>();
      if (doc.at("duration_ms").get<std::int64_t>() < 0) throw std::invalid_argument("negative duration");
    } catch (const std::exception&) {
      throw TransportError(ErrorKind::protocol_error, "agent sent a malformed envelope");
    }
    result.transport = core::TransportKind::http_agent;
    result.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    return result;
  }

 private:
  httplib::Headers headers() const {
    httplib::Headers h;
    if (key_) h.emplace(std::string(proto::kKeyHeader), *key_);
    return h;
  }

  std::unique_ptr<httplib::Client> client_;
  std::optional<std::string> key_;
};

}  // namespace

std::unique_ptr<Session> HttpAgentTransport::connect(const Endpoint& endpoint, const core::Credentials& credentials) {
  if (!credentials_match(core::TransportKind::http_agent, credentials))
    throw TransportError(ErrorKind::internal, "http_agent transport takes an agent key");
  std::optional<std::string> key;
  if (auto* k = std::get_if<core::AgentKey>(&credentials)) key = k->secret;

  auto client = std::make_unique<httplib::Client>(base_url(endpoint, config_.use_tls));
  auto [csec, cusec] = split_ms(config_.connect_timeout);
  client->set_connection_timeout(csec, cusec);
  client->set_read_timeout(csec, cusec);
  client->set_write_timeout(csec, cusec);
  client->set_keep_alive(true);
  if (config_.use_tls) {
    if (config_.ca_cert_path) client->set_ca_cert_path(*config_.ca_cert_path);
    client->enable_server_certificate_verification(config_.verify_tls);
  }

  auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
  };
  auto health = client->Get(std::string(proto::kHealthPath));
  if (!health) throw_for(health.error(), false, elapsed(), config_.connect_timeout);
  if (health->status != 200)
    throw TransportError(ErrorKind::protocol_error, "health check returned HTTP " + std::to_string(health->status));

  httplib::Headers h;
  if (key) h.emplace(std::string(proto::kKeyHeader), *key);
  auto auth = client->Post(std::string(proto::kExecPath), h, "", "application/json");
  if (!auth) throw_for(auth.error(), true, elapsed(), config_.connect_timeout);
  if (auth->status == 401) throw TransportError(ErrorKind::auth_failed, "agent rejected the key");
  if (auth->status != 400)
    throw TransportError(ErrorKind::protocol_error, "unexpected auth probe status " + std::to_string(auth->status));

  return std::make_unique<AgentSession>(endpoint, std::move(client), std::move(key));
}

}  // namespace dockhand::transport
