#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dockhand/transport/transport.hpp"

namespace dockhand::transport {

struct SshConfig {
  std::string ssh_bin = "ssh";
  /// Trust-on-first-use store; strict mode refuses unknown hosts.
  std::filesystem::path known_hosts_path;
  bool strict_host_key_checking = false;
  /// Directory for multiplexing sockets. Keep short: unix socket paths are
  /// limited to 108 bytes.
  std::filesystem::path control_dir;
  /// Idle lifetime of a cached connection per (endpoint, username, secret).
  std::chrono::seconds control_persist{60};
  std::chrono::milliseconds connect_timeout{10'000};
  /// Engine binary name on the remote host.
  std::string remote_docker_bin = "docker";

  static SshConfig defaults();
};

/// Runs each command over its own exec channel using the OpenSSH client.
/// Connections are multiplexed so that repeated execs skip the handshake.
class SshTransport final : public Transport {
 public:
  explicit SshTransport(SshConfig config = SshConfig::defaults());

  core::TransportKind kind() const override { return core::TransportKind::ssh; }
  std::unique_ptr<Session> connect(const Endpoint& endpoint, const core::Credentials& credentials) override;

 private:
  SshConfig config_;
};

namespace ssh_detail {

struct AuthFiles {
  std::optional<std::filesystem::path> identity_file;
  bool password_auth = false;
};

/// Client argument vector for one invocation. remote_words are quoted for the
/// remote shell; an empty list runs `true` (used to open the connection).
std::vector<std::string> build_argv(const SshConfig& config, const Endpoint& endpoint, std::string_view username,
                                    const std::filesystem::path& control_path, const AuthFiles& auth,
                                    const std::vector<std::string>& remote_words);

/// Maps a failed client invocation (exit 255 plus its stderr) to an error
/// kind. Returns nullopt when the output is the remote command's own.
std::optional<ErrorKind> classify_failure(int exit_code, std::string_view stderr_text);

}  // namespace ssh_detail

}  // namespace dockhand::transport
