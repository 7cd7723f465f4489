#include <doctest.h>

#include <sys/stat.h>

#include "dockhand/core/listing.hpp"
#include "support/equivalence.hpp"
#include "support/fake_ssh.hpp"
#include "support/fixtures.hpp"

using namespace dockhand;
using namespace dockhand::testing;
using transport::ErrorKind;
using namespace std::chrono_literals;

namespace {

core::CommandRequest req(const std::string& cmd, std::int64_t timeout_ms = 10'000) {
  auto r = core::request_from(core::validate_command(cmd), timeout_ms);
  REQUIRE(r.validated);
  return r;
}

transport::Endpoint agent_ep(int port) {
  return {"127.0.0.1", static_cast<std::uint16_t>(port), core::TransportKind::http_agent};
}

}  // namespace

TEST_CASE("local transport runs the engine binary") {
  TempDir dir;
  transport::LocalTransport t(local_config(dir / "state.json"));
  auto s = t.connect({"localhost", 1, core::TransportKind::local}, core::NoCredentials{});
  auto r = s->exec(req("docker version"));
  CHECK(r.exit_code == 0);
  CHECK(r.out == "mock-docker 1.0\n");
  CHECK(r.transport == core::TransportKind::local);
  try {
    s->exec(req("docker ps --sleep-ms 3000", 300));
    FAIL("expected timeout");
  } catch (const transport::TransportError& e) {
    CHECK(e.kind() == ErrorKind::timeout);
  }
  s->close();
  CHECK_THROWS_AS(t.connect({"localhost", 1, core::TransportKind::local}, core::AgentKey{"k"}),
                  transport::TransportError);
}

TEST_CASE("http_agent connect classifies failures") {
  TempDir dir;
  AgentFixture fx(dir / "state.json");
  transport::HttpAgentTransport t;
  CHECK(t.probe(agent_ep(fx.port), core::AgentKey{"test-agent-key"}).reachable);

  auto bad = t.probe(agent_ep(fx.port), core::AgentKey{"wrong"});
  CHECK_FALSE(bad.reachable);
  CHECK(bad.error == ErrorKind::auth_failed);

  auto closed = t.probe(agent_ep(closed_port()), core::AgentKey{"k"});
  CHECK_FALSE(closed.reachable);
  CHECK(closed.error == ErrorKind::unreachable);
  CHECK(fx.agent->spawn_count() == 0);
}

TEST_CASE("http_agent sessions map agent replies") {
  TempDir dir;
  AgentFixture fx(dir / "state.json");
  transport::HttpAgentTransport t;
  auto s = t.connect(agent_ep(fx.port), core::AgentKey{"test-agent-key"});
  auto r = s->exec(req("docker logs --tail 1 db"));
  CHECK(r.out == "postgres: shutting down\n");
  CHECK(r.transport == core::TransportKind::http_agent);
  try {
    s->exec(req("docker ps --sleep-ms 3000", 400));
    FAIL("expected timeout");
  } catch (const transport::TransportError& e) {
    CHECK(e.kind() == ErrorKind::timeout);
  }
  s->close();
  try {
    s->exec(req("docker ps"));
    FAIL("expected protocol_error");
  } catch (const transport::TransportError& e) {
    CHECK(e.kind() == ErrorKind::protocol_error);
  }
}

TEST_CASE("http_agent maps a remote policy rejection") {
  TempDir dir;
  agent::AgentConfig cfg;
  cfg.bind_host = "127.0.0.1";
  cfg.port = 0;
  cfg.key = "k";
  cfg.docker_bin = kMockDocker;
  cfg.env = {{mock::kStateEnv, (dir / "state.json").string()}};
  cfg.policy = core::ValidationPolicy::defaults();
  cfg.policy.allowlisted_subcommands = {"version"};
  agent::Agent a(cfg);
  int port = a.start();
  transport::HttpAgentTransport t;
  auto s = t.connect(agent_ep(port), core::AgentKey{"k"});
  try {
    s->exec(req("docker ps"));
    FAIL("expected rejection");
  } catch (const transport::TransportError& e) {
    CHECK(e.kind() == ErrorKind::command_rejected_remotely);
  }
}

TEST_CASE("local and agent transports agree on every command and state") {
  TempDir dir;
  transport::HttpAgentTransport agent_t;
  for (unsigned seed = 1; seed <= 5; ++seed) {
    auto state = random_state(seed);
    auto local_state = dir / ("local-" + std::to_string(seed) + ".json");
    auto agent_state = dir / ("agent-" + std::to_string(seed) + ".json");
    mock::seed_state(local_state, state);
    mock::seed_state(agent_state, state);
    AgentFixture fx(agent_state);
    transport::LocalTransport local_t(local_config(local_state));
    auto ls = local_t.connect({"localhost", 1, core::TransportKind::local}, core::NoCredentials{});
    auto as = agent_t.connect(agent_ep(fx.port), core::AgentKey{"test-agent-key"});
    for (const auto& cmd : equivalence_commands()) {
      INFO("seed " << seed << ": " << cmd);
      auto a = ls->exec(req(cmd));
      auto b = as->exec(req(cmd));
      CHECK(a.exit_code == b.exit_code);
      CHECK(a.out == b.out);
      CHECK(a.err == b.err);
    }
    CHECK(mock::load_state(local_state) == mock::load_state(agent_state));
  }
}

TEST_CASE("ssh transport through a stand-in client") {
  TempDir dir;
  auto state = dir / "state.json";
  auto fake = write_fake_ssh(dir, "hunter2", state);
  transport::SshTransport t(fake_ssh_config(dir, fake));
  transport::Endpoint ep{"edge.test", 22, core::TransportKind::ssh};

  auto s = t.connect(ep, core::SshPassword{"pi", "hunter2"});
  auto r = s->exec(req("docker ps -a --format '{{.ID}}\t{{.Names}}\t{{.Image}}\t{{.Status}}'"));
  CHECK(r.exit_code == 0);
  CHECK(r.transport == core::TransportKind::ssh);
  auto rows = core::parse_containers(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].name == "web");
  r = s->exec(req("docker logs \"it's\""));
  CHECK(r.exit_code == 1);
  CHECK(r.err == "Error response from daemon: No such container: it's\n");
  s->close();

  auto key = t.connect(ep, core::SshKey{"pi", "-----BEGIN KEY-----", std::nullopt});
  CHECK(key->exec(req("docker version")).out == "mock-docker 1.0\n");

  auto denied = t.probe(ep, core::SshPassword{"pi", "wrong"});
  CHECK_FALSE(denied.reachable);
  CHECK(denied.error == ErrorKind::auth_failed);

  auto refused = t.probe({"refused.test", 22, core::TransportKind::ssh}, core::SshPassword{"pi", "hunter2"});
  CHECK(refused.error == ErrorKind::unreachable);

  auto started = std::chrono::steady_clock::now();
  auto slow = t.probe({"slow.test", 22, core::TransportKind::ssh}, core::SshPassword{"pi", "hunter2"});
  CHECK(slow.error == ErrorKind::timeout);
  CHECK(std::chrono::steady_clock::now() - started < 10s);

  CHECK(t.probe(ep, core::AgentKey{"k"}).error == ErrorKind::internal);
}

TEST_CASE("ssh secrets never appear on the client command line") {
  TempDir dir;
  auto argv_log = dir / "argv.log";
  auto fake = dir / "argv-ssh";
  write_text(fake, "#!/bin/sh\nprintf '%s\\n' \"$@\" >> '" + argv_log.string() + "'\nexit 0\n");
  ::chmod(fake.c_str(), 0755);
  transport::SshTransport t(fake_ssh_config(dir, fake));
  auto s = t.connect({"edge.test", 22, core::TransportKind::ssh}, core::SshPassword{"pi", "s3cr3t-pw"});
  s->exec(req("docker ps"));
  s->close();
  auto logged = read_text(argv_log);
  CHECK(logged.find("edge.test") != std::string::npos);
  CHECK(logged.find("s3cr3t-pw") == std::string::npos);
}
