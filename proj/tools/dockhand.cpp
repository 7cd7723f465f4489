// dockhand: controller, agent and scripting front end.
#include <termios.h>
#include <unistd.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dockhand/agent/agent.hpp"
#include "dockhand/bench/bench.hpp"
#include "dockhand/controller/controller.hpp"
#include "dockhand/controller/pipeline.hpp"
#include "dockhand/core/json_codec.hpp"
#include "dockhand/core/registry.hpp"
#include "dockhand/transport/provider.hpp"

namespace {

using namespace dockhand;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitRejected = 2;
constexpr int kExitTransport = 3;

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

bool use_color() { return !env("NO_COLOR") && ::isatty(STDERR_FILENO); }

int report_error(const std::string& message, int code) {
  if (use_color()) std::cerr << "\033[31merror:\033[0m " << message << "\n";
  else std::cerr << "error: " << message << "\n";
  return code;
}

std::filesystem::path default_store() {
  if (auto p = env("DOCKHAND_STORE")) return *p;
  auto home = env("HOME").value_or("/tmp");
  return std::filesystem::path(home) / ".dockhand" / "devices.json";
}

std::pair<std::string, int> split_bind(const std::string& bind) {
  auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--bind", "expected host:port");
  return {bind.substr(0, colon), std::stoi(bind.substr(colon + 1))};
}

std::string prompt(const std::string& label, bool secret) {
  std::cerr << label << std::flush;
  termios old{};
  bool tty = ::isatty(STDIN_FILENO) && ::tcgetattr(STDIN_FILENO, &old) == 0;
  if (secret && tty) {
    termios quiet = old;
    quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
    ::tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
  }
  std::string line;
  std::getline(std::cin, line);
  if (secret && tty) {
    ::tcsetattr(STDIN_FILENO, TCSANOW, &old);
    std::cerr << "\n";
  }
  return line;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Environment first, then an interactive prompt for whatever is missing.
core::Credentials gather_credentials(core::TransportKind kind) {
  switch (kind) {
    case core::TransportKind::local: return core::NoCredentials{};
    case core::TransportKind::http_agent: {
      auto key = env("DOCKHAND_AGENT_KEY");
      if (!key) key = env("AGENT_KEY");
      if (!key) key = prompt("Agent key: ", true);
      if (key->empty()) return core::NoCredentials{};
      return core::AgentKey{*key};
    }
    case core::TransportKind::ssh: {
      auto user = env("DOCKHAND_SSH_USER");
      if (!user) user = prompt("SSH username: ", false);
      if (user->empty()) throw std::runtime_error("an SSH username is required");
      if (auto key_file = env("DOCKHAND_SSH_KEY_FILE"))
        return core::SshKey{*user, read_file(*key_file), env("DOCKHAND_SSH_KEY_PASSPHRASE")};
      auto password = env("DOCKHAND_SSH_PASSWORD");
      if (!password) password = prompt("SSH password: ", true);
      return core::SshPassword{*user, *password};
    }
  }
  return core::NoCredentials{};
}

struct TransportOptions {
  bool allow_local = false;
  std::string docker_bin = "docker";
  std::string known_hosts;
  bool strict_host_keys = false;
  bool agent_tls = false;
  std::string agent_ca_cert;
  bool agent_tls_insecure = false;

  void add_to(CLI::App* app) {
    app->add_flag("--allow-local-transport", allow_local, "Enable the local transport (dev/test only)");
    app->add_option("--docker-bin", docker_bin, "Engine binary used by the local transport");
    app->add_option("--known-hosts", known_hosts, "SSH known-hosts file (trust on first use)");
    app->add_flag("--strict-host-key-checking", strict_host_keys, "Refuse SSH hosts missing from known-hosts");
    app->add_flag("--agent-tls", agent_tls, "Talk to agents over HTTPS");
    app->add_option("--agent-ca-cert", agent_ca_cert, "CA bundle for agent TLS");
    app->add_flag("--agent-tls-insecure", agent_tls_insecure, "Skip agent certificate verification");
  }

  std::shared_ptr<transport::StandardTransports> build() const {
    auto ssh = transport::SshConfig::defaults();
    if (!known_hosts.empty()) ssh.known_hosts_path = known_hosts;
    ssh.strict_host_key_checking = strict_host_keys;
    transport::HttpAgentConfig http;
    http.use_tls = agent_tls;
    if (!agent_ca_cert.empty()) http.ca_cert_path = agent_ca_cert;
    http.verify_tls = !agent_tls_insecure;
    std::optional<transport::LocalConfig> local;
    if (allow_local) local = transport::LocalConfig{docker_bin, {}};
    return std::make_shared<transport::StandardTransports>(ssh, http, local);
  }
};

void wait_for_signal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  int sig = 0;
  sigwait(&set, &sig);
}

void block_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dockhand: manage container engines on remote hosts over SSH or an HTTP agent"};
  app.require_subcommand(1);
  std::string store_path = default_store().string();
  std::string format = "text";

  // serve
  auto* serve = app.add_subcommand("serve", "Run the REST controller");
  std::string serve_bind = "127.0.0.1:8080";
  std::string ui_dir;
  bool cache_credentials = false;
  TransportOptions serve_transports;
  serve->add_option("--bind", serve_bind, "host:port to listen on")->capture_default_str();
  serve->add_option("--store", store_path, "Device store path")->capture_default_str();
  serve->add_option("--ui-dir", ui_dir, "Directory with the compiled UI assets");
  serve->add_flag("--cache-credentials", cache_credentials, "Keep credentials in memory for 15 minutes");
  serve_transports.add_to(serve);

  // agent
  auto* agent_cmd = app.add_subcommand("agent", "Run the host-side HTTP command agent");
  std::string agent_bind = "0.0.0.0:9090";
  std::string agent_key;
  std::string agent_docker_bin = "docker";
  std::size_t max_concurrency = 16;
  bool reject_when_busy = false;
  std::string tls_cert, tls_key;
  agent_cmd->add_option("--bind", agent_bind, "host:port to listen on")->capture_default_str();
  agent_cmd->add_option("--key", agent_key, "Shared secret (or AGENT_KEY)")->envname("AGENT_KEY");
  agent_cmd->add_option("--docker-bin", agent_docker_bin, "Engine binary")->capture_default_str();
  agent_cmd->add_option("--max-concurrency", max_concurrency, "Concurrent command limit")->capture_default_str();
  agent_cmd->add_flag("--reject-when-busy", reject_when_busy, "Answer 429 instead of queueing over the limit");
  agent_cmd->add_option("--tls-cert", tls_cert, "TLS certificate (PEM)");
  agent_cmd->add_option("--tls-key", tls_key, "TLS private key (PEM)");

  // device
  auto* device = app.add_subcommand("device", "Manage registered devices");
  device->require_subcommand(1);
  device->add_option("--store", store_path, "Device store path");
  auto* device_add = device->add_subcommand("add", "Register a device");
  std::string name, address, transport_name;
  int port = 0;
  bool device_allow_local = false;
  device_add->add_option("--name", name, "Display name");
  device_add->add_option("--address", address, "Hostname or IP")->required();
  device_add->add_option("--port", port, "Port")->required();
  device_add->add_option("--transport", transport_name, "ssh | http_agent | local")->required();
  device_add->add_option("--store", store_path, "Device store path");
  device_add->add_flag("--allow-local-transport", device_allow_local, "Permit the local transport");
  auto* device_ls = device->add_subcommand("ls", "List devices");
  device_ls->add_option("--store", store_path, "Device store path");
  device_ls->add_option("--format", format, "text | json");
  auto* device_rm = device->add_subcommand("rm", "Remove a device");
  std::string rm_id;
  device_rm->add_option("id", rm_id, "Device id")->required();
  device_rm->add_option("--store", store_path, "Device store path");

  // exec
  auto* exec_cmd = app.add_subcommand("exec", "Run an engine command on a device");
  std::string exec_device, exec_command;
  std::int64_t exec_timeout = core::kDefaultExecTimeoutMs;
  TransportOptions exec_transports;
  exec_cmd->add_option("--device", exec_device, "Device id")->required();
  exec_cmd->add_option("--command", exec_command, "Command, e.g. \"docker ps\"")->required();
  exec_cmd->add_option("--timeout-ms", exec_timeout, "Command timeout")->capture_default_str();
  exec_cmd->add_option("--store", store_path, "Device store path");
  exec_cmd->add_option("--format", format, "text | json");
  exec_transports.add_to(exec_cmd);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Measure round-trip latency and throughput");
  std::string bench_device, bench_address, bench_transport;
  int bench_port = 0;
  std::string bench_command = "docker version";
  int reps = 50;
  int warmup = 3;
  std::vector<int> levels{1, 8, 32};
  std::string bench_format = "csv";
  TransportOptions bench_transports;
  bench_cmd->add_option("--device", bench_device, "Device id from the store");
  bench_cmd->add_option("--address", bench_address, "Target address");
  bench_cmd->add_option("--port", bench_port, "Target port");
  bench_cmd->add_option("--transport", bench_transport, "ssh | http_agent | local");
  bench_cmd->add_option("--command", bench_command, "Command to time")->capture_default_str();
  bench_cmd->add_option("--reps", reps, "Execs per level")->capture_default_str();
  bench_cmd->add_option("--warmup", warmup, "Discarded warmup execs")->capture_default_str();
  bench_cmd->add_option("--levels", levels, "Concurrency levels")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--format", bench_format, "json | csv")->capture_default_str();
  bench_cmd->add_option("--store", store_path, "Device store path");
  bench_transports.add_to(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*serve) {
      block_signals();
      controller::ControllerConfig cfg;
      std::tie(cfg.bind_host, cfg.port) = split_bind(serve_bind);
      cfg.store_path = store_path;
      cfg.allow_local_transport = serve_transports.allow_local;
      if (!ui_dir.empty()) cfg.ui_dir = ui_dir;
      cfg.cache_credentials = cache_credentials;
      if (auto parent = std::filesystem::path(store_path).parent_path(); !parent.empty())
        std::filesystem::create_directories(parent);
      controller::Controller ctl(cfg, serve_transports.build());
      ctl.start();
      std::cerr << "controller listening on " << cfg.bind_host << ":" << ctl.port() << "\n";
      wait_for_signal();
      ctl.stop();
      return kExitOk;
    }

    if (*agent_cmd) {
      if (agent_key.empty()) return report_error("an agent key is required (--key or AGENT_KEY)", kExitFailure);
      block_signals();
      agent::AgentConfig cfg;
      std::tie(cfg.bind_host, cfg.port) = split_bind(agent_bind);
      cfg.key = agent_key;
      cfg.docker_bin = agent_docker_bin;
      cfg.max_concurrency = max_concurrency;
      cfg.reject_when_busy = reject_when_busy;
      if (!tls_cert.empty()) cfg.tls_cert = tls_cert;
      if (!tls_key.empty()) cfg.tls_key = tls_key;
      agent::Agent ag(cfg);
      ag.start();
      std::cerr << "agent listening on " << cfg.bind_host << ":" << ag.port() << "\n";
      wait_for_signal();
      ag.stop();
      return kExitOk;
    }

    auto open_store = [&](bool allow_local) {
      if (std::filesystem::exists(store_path))
        return std::unique_ptr<core::RegistryStore>(new core::RegistryStore(core::RegistryStore::load(store_path, allow_local)));
      return std::make_unique<core::RegistryStore>(allow_local);
    };
    auto save_store = [&](const core::RegistryStore& store) {
      if (auto parent = std::filesystem::path(store_path).parent_path(); !parent.empty())
        std::filesystem::create_directories(parent);
      store.save(store_path);
    };

    if (*device_add) {
      auto kind = core::parse_transport_kind(transport_name);
      if (!kind) return report_error("transport must be ssh, http_agent or local", kExitFailure);
      auto store = open_store(device_allow_local);
      auto rec = store->add(name.empty() ? address : name, address, port, *kind);
      save_store(*store);
      std::cout << rec.id.str() << "\n";
      return kExitOk;
    }
    if (*device_ls) {
      auto store = open_store(true);
      if (format == "json") {
        json arr = json::array();
        for (const auto& rec : store->list()) arr.push_back(core::to_json(rec));
        std::cout << arr.dump(2) << "\n";
      } else {
        for (const auto& rec : store->list())
          std::cout << rec.id.str() << "\t" << rec.name << "\t" << rec.address << ":" << rec.port << "\t"
                    << core::to_string(rec.transport) << "\t" << core::to_string(rec.last_status) << "\n";
      }
      return kExitOk;
    }
    if (*device_rm) {
      auto store = open_store(true);
      store->remove(core::DeviceId{rm_id});
      save_store(*store);
      return kExitOk;
    }

    if (*exec_cmd) {
      // Validate before touching the store or asking for credentials.
      auto verdict = core::validate_command(exec_command);
      if (!verdict) return report_error("command rejected: " + std::string(core::to_string(verdict.reason())), kExitRejected);
      auto store = open_store(exec_transports.allow_local);
      auto rec = store->get(core::DeviceId{exec_device});
      auto creds = gather_credentials(rec.transport);
      auto transports = exec_transports.build();
      auto result = controller::execute_on_device(rec, creds, exec_command, exec_timeout,
                                                  core::ValidationPolicy::defaults(), *transports);
      if (format == "json") {
        std::cout << core::to_json(result).dump() << "\n";
      } else {
        std::cout << result.out << std::flush;
        std::cerr << result.err;
        if (result.exit_code != 0) std::cerr << "remote command exited with " << result.exit_code << "\n";
      }
      return kExitOk;
    }

    if (*bench_cmd) {
      bench::BenchConfig cfg;
      if (!bench_device.empty()) {
        auto store = open_store(bench_transports.allow_local);
        cfg.endpoint = transport::Endpoint::of(store->get(core::DeviceId{bench_device}));
      } else {
        auto kind = core::parse_transport_kind(bench_transport);
        if (!kind || bench_address.empty() || bench_port <= 0)
          return report_error("give --device, or --address, --port and --transport", kExitFailure);
        cfg.endpoint = {bench_address, static_cast<std::uint16_t>(bench_port), *kind};
      }
      if (cfg.endpoint.transport == core::TransportKind::local && !bench_transports.allow_local)
        return report_error("the local transport needs --allow-local-transport", kExitFailure);
      auto verdict = core::validate_command(bench_command);
      if (!verdict) return report_error("command rejected: " + std::string(core::to_string(verdict.reason())), kExitRejected);
      cfg.credentials = gather_credentials(cfg.endpoint.transport);
      cfg.command = bench_command;
      cfg.repetitions = reps;
      cfg.warmup = warmup;
      cfg.concurrency_levels = levels;
      auto transports = bench_transports.build();
      auto* t = transports->find(cfg.endpoint.transport);
      auto report = bench::run_bench(cfg, *t);
      std::cout << bench::emit(report, bench_format == "json" ? bench::Format::json : bench::Format::csv);
      return kExitOk;
    }
  } catch (const controller::ValidationRejected& e) {
    return report_error(e.what(), kExitRejected);
  } catch (const transport::TransportError& e) {
    return report_error(std::string(transport::to_string(e.kind())) + ": " + e.detail(), kExitTransport);
  } catch (const bench::BenchError& e) {
    bool transport_failure = e.code() == bench::BenchError::Code::target_unreachable ||
                             e.code() == bench::BenchError::Code::all_requests_failed;
    return report_error(e.what(), transport_failure ? kExitTransport : kExitFailure);
  } catch (const std::exception& e) {
    return report_error(e.what(), kExitFailure);
  }
  return kExitOk;
}
