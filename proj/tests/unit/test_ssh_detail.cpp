#include <doctest.h>

#include <algorithm>

#include "dockhand/transport/ssh.hpp"

using namespace dockhand::transport;
using namespace dockhand::transport::ssh_detail;

namespace {

bool has_option(const std::vector<std::string>& argv, const std::string& opt) {
  for (std::size_t i = 0; i + 1 < argv.size(); ++i)
    if (argv[i] == "-o" && argv[i + 1] == opt) return true;
  return false;
}

SshConfig config() {
  SshConfig c;
  c.known_hosts_path = "/tmp/kh";
  c.control_dir = "/tmp/cd";
  return c;
}

}  // namespace

TEST_CASE("argv for a password session") {
  Endpoint ep{"192.168.10.23", 2222, dockhand::core::TransportKind::ssh};
  auto argv = build_argv(config(), ep, "pi", "/tmp/cd/abc", AuthFiles{std::nullopt, true},
                         {"docker", "ps", "--format", "{{.ID}}\t{{.Names}}"});
  CHECK(argv.front() == "ssh");
  CHECK(std::find(argv.begin(), argv.end(), "2222") != argv.end());
  CHECK(has_option(argv, "StrictHostKeyChecking=accept-new"));
  CHECK(has_option(argv, "UserKnownHostsFile=/tmp/kh"));
  CHECK(has_option(argv, "ControlMaster=auto"));
  CHECK(has_option(argv, "ControlPath=/tmp/cd/abc"));
  CHECK(has_option(argv, "PubkeyAuthentication=no"));
  REQUIRE(argv.size() >= 3);
  CHECK(argv[argv.size() - 3] == "--");
  CHECK(argv[argv.size() - 2] == "192.168.10.23");
  CHECK(argv.back() == "'docker' 'ps' '--format' '{{.ID}}\t{{.Names}}'");
}

TEST_CASE("argv for a key session in strict mode") {
  auto c = config();
  c.strict_host_key_checking = true;
  Endpoint ep{"edge", 22, dockhand::core::TransportKind::ssh};
  auto argv = build_argv(c, ep, "pi", "/tmp/cd/abc", AuthFiles{"/tmp/s/id", false}, {});
  CHECK(has_option(argv, "StrictHostKeyChecking=yes"));
  CHECK(has_option(argv, "PasswordAuthentication=no"));
  auto i = std::find(argv.begin(), argv.end(), "-i");
  REQUIRE(i != argv.end());
  CHECK(*(i + 1) == "/tmp/s/id");
  CHECK(argv.back() == "true");
}

TEST_CASE("remote words cannot break out of their quotes") {
  Endpoint ep{"edge", 22, dockhand::core::TransportKind::ssh};
  auto argv = build_argv(config(), ep, "pi", "/tmp/cd/abc", {}, {"docker", "logs", "it's"});
  CHECK(argv.back() == "'docker' 'logs' 'it'\\''s'");
}

TEST_CASE("client failures are classified") {
  struct Row {
    int exit_code;
    const char* err;
    std::optional<ErrorKind> expected;
  };
  const Row rows[] = {
      {0, "", std::nullopt},
      {1, "Permission denied", std::nullopt},
      {255, "pi@192.168.10.23: Permission denied (publickey,password).", ErrorKind::auth_failed},
      {255, "Received disconnect: Too many authentication failures", ErrorKind::auth_failed},
      {255, "ssh: connect to host 192.168.10.23 port 22: Connection refused", ErrorKind::unreachable},
      {255, "ssh: connect to host x port 22: No route to host", ErrorKind::unreachable},
      {255, "ssh: Could not resolve hostname nowhere: Name or service not known", ErrorKind::unreachable},
      {255, "ssh: connect to host 10.255.255.1 port 22: Connection timed out", ErrorKind::timeout},
      {255, "Host key verification failed.", ErrorKind::protocol_error},
      {255, "kex_exchange_identification: read: Connection reset by peer", ErrorKind::unreachable},
      {255, "Unable to negotiate: no matching key exchange method found", ErrorKind::protocol_error},
      {255, "remote program printed this", std::nullopt},
  };
  for (const auto& r : rows) {
    INFO(r.err);
    CHECK(classify_failure(r.exit_code, r.err) == r.expected);
  }
}

TEST_CASE("defaults") {
  auto c = SshConfig::defaults();
  CHECK_FALSE(c.strict_host_key_checking);
  CHECK(c.control_persist == std::chrono::seconds(60));
  CHECK(c.control_dir.string().size() < 60);
}
