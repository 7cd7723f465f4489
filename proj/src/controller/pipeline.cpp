#include "dockhand/controller/pipeline.hpp"

namespace dockhand::controller {

using transport::ErrorKind;
using transport::TransportError;

namespace {

transport::Transport& transport_for(const core::DeviceRecord& device, transport::TransportProvider& transports) {
  auto* t = transports.find(device.transport);
  if (!t)
    throw TransportError(ErrorKind::internal,
                         "transport " + std::string(core::to_string(device.transport)) + " is not enabled");
  return *t;
}

}  // namespace

core::CommandResult execute_on_device(const core::DeviceRecord& device, const core::Credentials& credentials,
                                      std::string_view raw_command, std::int64_t timeout_ms,
                                      const core::ValidationPolicy& policy, transport::TransportProvider& transports) {
  auto verdict = core::validate_command(raw_command, policy);
  if (!verdict) throw ValidationRejected(std::string(core::to_string(verdict.reason())));

  auto& transport = transport_for(device, transports);
  auto session = transport.connect(transport::Endpoint::of(device), credentials);
  try {
    auto result = session->exec(core::request_from(verdict, timeout_ms));
    session->close();
    return result;
  } catch (...) {
    session->close();
    throw;
  }
}

transport::ProbeStatus probe_device(const core::DeviceRecord& device, const core::Credentials& credentials,
                                    transport::TransportProvider& transports) {
  auto* t = transports.find(device.transport);
  if (!t) return transport::ProbeStatus::failed(ErrorKind::internal, "transport not enabled");
  return t->probe(transport::Endpoint::of(device), credentials);
}

}  // namespace dockhand::controller
