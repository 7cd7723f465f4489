#include "dockhand/transport/local.hpp"

#include "dockhand/core/validation.hpp"
#include "dockhand/transport/process.hpp"

namespace dockhand::transport {

namespace {

class LocalSession final : public Session {
 public:
  LocalSession(Endpoint endpoint, const LocalConfig& config) : Session(std::move(endpoint)), config_(config) {}

 protected:
  core::CommandResult do_exec(const core::CommandRequest& request) override {
    auto started = std::chrono::steady_clock::now();
    ProcessOptions opts;
    opts.argv = core::split_command(request.raw);
    if (opts.argv.empty()) throw TransportError(ErrorKind::internal, "empty command");
    if (opts.argv[0] == "docker") opts.argv[0] = config_.docker_bin;
    opts.env = config_.env;
    opts.timeout = std::chrono::milliseconds(request.timeout_ms);

    auto outcome = run_process(opts);
    if (outcome.timed_out)
      throw TransportError(ErrorKind::timeout, "command exceeded " + std::to_string(request.timeout_ms) + " ms");
    if (outcome.spawn_failed) throw TransportError(ErrorKind::internal, outcome.err);

    core::CommandResult result;
    result.exit_code = outcome.exit_code;
    result.out = core::to_valid_utf8(outcome.out);
    result.err = core::to_valid_utf8(outcome.err);
    result.transport = core::TransportKind::local;
    result.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    return result;
  }

 private:
  LocalConfig config_;
};

}  // namespace

std::unique_ptr<Session> LocalTransport::connect(const Endpoint& endpoint, const core::Credentials& credentials) {
  if (!credentials_match(core::TransportKind::local, credentials))
    throw TransportError(ErrorKind::internal, "local transport takes no credentials");
  return std::make_unique<LocalSession>(endpoint, config_);
}

}  // namespace dockhand::transport
