#include "dockhand/transport/ssh.hpp"

#include <openssl/sha.h>
#include <sys/stat.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "dockhand/core/validation.hpp"
#include "dockhand/transport/process.hpp"

namespace dockhand::transport {

namespace fs = std::filesystem;

SshConfig SshConfig::defaults() {
  SshConfig c;
  const char* home = std::getenv("HOME");
  c.known_hosts_path = fs::path(home ? home : "/tmp") / ".dockhand_known_hosts";
  c.control_dir = fs::temp_directory_path() / ("dockhand-ssh-" + std::to_string(::getuid()));
  return c;
}

SshTransport::SshTransport(SshConfig config) : config_(std::move(config)) {}

namespace ssh_detail {

std::vector<std::string> build_argv(const SshConfig& config, const Endpoint& endpoint, std::string_view username,
                                    const fs::path& control_path, const AuthFiles& auth,
                                    const std::vector<std::string>& remote_words) {
  auto connect_secs = std::max<long long>(
      1, std::chrono::duration_cast<std::chrono::seconds>(config.connect_timeout).count());
  std::vector<std::string> argv = {
      config.ssh_bin,
      "-p", std::to_string(endpoint.port),
      "-l", std::string(username),
      "-T",
      "-o", "LogLevel=ERROR",
      "-o", "ConnectTimeout=" + std::to_string(connect_secs),
      "-o", "IdentityAgent=none",
      "-o", "NumberOfPasswordPrompts=1",
      "-o", "UserKnownHostsFile=" + config.known_hosts_path.string(),
      "-o", std::string("StrictHostKeyChecking=") + (config.strict_host_key_checking ? "yes" : "accept-new"),
      "-o", "ControlMaster=auto",
      "-o", "ControlPath=" + control_path.string(),
      "-o", "ControlPersist=" + std::to_string(config.control_persist.count()),
  };
  if (auth.password_auth) {
    argv.insert(argv.end(), {"-o", "PreferredAuthentications=password,keyboard-interactive", "-o",
                             "PubkeyAuthentication=no"});
  } else {
    argv.insert(argv.end(), {"-o", "PreferredAuthentications=publickey", "-o", "IdentitiesOnly=yes", "-o",
                             "PasswordAuthentication=no"});
    if (auth.identity_file) argv.insert(argv.end(), {"-i", auth.identity_file->string()});
  }
  argv.push_back("--");
  argv.push_back(endpoint.address);
  if (remote_words.empty()) {
    argv.push_back("true");
  } else {
    std::string remote;
    for (const auto& w : remote_words) {
      if (!remote.empty()) remote.push_back(' ');
      remote += core::shell_quote(w);
    }
    argv.push_back(std::move(remote));
  }
  return argv;
}

std::optional<ErrorKind> classify_failure(int exit_code, std::string_view err) {
  if (exit_code != 255) return std::nullopt;
  auto has = [&](std::string_view needle) { return err.find(needle) != std::string_view::npos; };
  if (has("Permission denied") || has("Too many authentication failures") || has("Authentication failed"))
    return ErrorKind::auth_failed;
  if (has("Host key verification failed") || has("REMOTE HOST IDENTIFICATION HAS CHANGED") ||
      has("Protocol major versions differ") || has("no matching"))
    return ErrorKind::protocol_error;
  if (has("timed out")) return ErrorKind::timeout;
  if (has("Connection refused") || has("No route to host") || has("Could not resolve hostname") ||
      has("Network is unreachable") || has("Name or service not known") || has("Connection reset") ||
      has("Connection closed by"))
    return ErrorKind::unreachable;
  if (has("ssh:") || has("kex_exchange_identification")) return ErrorKind::protocol_error;
  return std::nullopt;
}

}  // namespace ssh_detail

namespace {

std::string hex_digest(std::string_view data) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), md.data());
  std::string out;
  char buf[3];
  for (std::size_t i = 0; i < 16; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

// Per-session scratch directory (mode 0700) for the askpass helper and key file.
class ScratchDir {
 public:
  ScratchDir() {
    std::string tmpl = (fs::temp_directory_path() / "dockhand-ssh-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw TransportError(ErrorKind::internal, "cannot create scratch directory");
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const fs::path& path() const { return path_; }

  fs::path write(const std::string& name, std::string_view content, mode_t mode) const {
    auto p = path_ / name;
    {
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out << content;
      if (!out) throw TransportError(ErrorKind::internal, "cannot write " + p.string());
    }
    ::chmod(p.c_str(), mode);
    return p;
  }

 private:
  fs::path path_;
};

constexpr const char* kSecretEnv = "DOCKHAND_ASKPASS_SECRET";

class SshSession final : public Session {
 public:
  SshSession(Endpoint endpoint, SshConfig config, std::string username, std::optional<std::string> secret,
             std::unique_ptr<ScratchDir> scratch, fs::path control_path, ssh_detail::AuthFiles auth)
      : Session(std::move(endpoint)),
        config_(std::move(config)),
        username_(std::move(username)),
        secret_(std::move(secret)),
        scratch_(std::move(scratch)),
        control_path_(std::move(control_path)),
        auth_(std::move(auth)) {}

  // Runs the client; throws for client-level failures.
  ProcessOutcome run(const std::vector<std::string>& remote_words, std::chrono::milliseconds timeout) {
    ProcessOptions opts;
    opts.argv = ssh_detail::build_argv(config_, endpoint(), username_, control_path_, auth_, remote_words);
    opts.timeout = timeout;
    if (secret_) {
      opts.env["SSH_ASKPASS"] = (scratch_->path() / "askpass").string();
      opts.env["SSH_ASKPASS_REQUIRE"] = "force";
      opts.env["DISPLAY"] = ":0";
      opts.env[kSecretEnv] = *secret_;
    }
    auto outcome = run_process(opts);
    if (outcome.timed_out)
      throw TransportError(ErrorKind::timeout, "ssh exceeded " + std::to_string(timeout.count()) + " ms");
    if (outcome.spawn_failed) throw TransportError(ErrorKind::internal, outcome.err);
    if (auto kind = ssh_detail::classify_failure(outcome.exit_code, outcome.err)) {
      auto detail = outcome.err;
      while (!detail.empty() && (detail.back() == '\n' || detail.back() == '\r')) detail.pop_back();
      throw TransportError(*kind, detail);
    }
    return outcome;
  }

 protected:
  core::CommandResult do_exec(const core::CommandRequest& request) override {
    auto started = std::chrono::steady_clock::now();
    auto words = core::split_command(request.raw);
    if (words.empty()) throw TransportError(ErrorKind::internal, "empty command");
    if (words[0] == "docker") words[0] = config_.remote_docker_bin;
    auto outcome = run(words, std::chrono::milliseconds(request.timeout_ms));

    core::CommandResult result;
    result.exit_code = outcome.exit_code;
    result.out = core::to_valid_utf8(outcome.out);
    result.err = core::to_valid_utf8(outcome.err);
    result.transport = core::TransportKind::ssh;
    result.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    return result;
  }

  void do_close() override { scratch_.reset(); }

 private:
  SshConfig config_;
  std::string username_;
  std::optional<std::string> secret_;
  std::unique_ptr<ScratchDir> scratch_;
  fs::path control_path_;
  ssh_detail::AuthFiles auth_;
};

}  // namespace

std::unique_ptr<Session> SshTransport::connect(const Endpoint& endpoint, const core::Credentials& credentials) {
  if (!credentials_match(core::TransportKind::ssh, credentials))
    throw TransportError(ErrorKind::internal, "ssh transport takes ssh_password or ssh_key credentials");

  auto scratch = std::make_unique<ScratchDir>();
  std::string username;
  std::optional<std::string> secret;
  std::string fingerprint_material;
  ssh_detail::AuthFiles auth;

  if (auto* pw = std::get_if<core::SshPassword>(&credentials)) {
    username = pw->username;
    secret = pw->password;
    auth.password_auth = true;
    fingerprint_material = "password\n" + pw->password;
  } else {
    const auto& key = std::get<core::SshKey>(credentials);
    username = key.username;
    auto text = key.private_key;
    if (!text.empty() && text.back() != '\n') text.push_back('\n');
    auth.identity_file = scratch->write("id", text, 0600);
    secret = key.passphrase;
    fingerprint_material = "key\n" + key.private_key + "\n" + key.passphrase.value_or("");
  }
  if (username.empty()) throw TransportError(ErrorKind::internal, "ssh username must be non-empty");
  if (secret) scratch->write("askpass", std::string("#!/bin/sh\nprintf '%s\\n' \"$") + kSecretEnv + "\"\n", 0700);

  std::error_code ec;
  fs::create_directories(config_.control_dir, ec);
  ::chmod(config_.control_dir.c_str(), 0700);
  auto control_path =
      config_.control_dir / hex_digest(username + '\0' + endpoint.address + '\0' + std::to_string(endpoint.port) +
                                       '\0' + fingerprint_material);

  auto session = std::make_unique<SshSession>(endpoint, config_, username, secret, std::move(scratch),
                                              control_path, auth);
  auto outcome = session->run({}, config_.connect_timeout + std::chrono::seconds(2));
  if (outcome.exit_code != 0)
    throw TransportError(ErrorKind::protocol_error, "ssh connection check exited with " +
                                                        std::to_string(outcome.exit_code));
  return session;
}

}  // namespace dockhand::transport
