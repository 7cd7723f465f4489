#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "dockhand/core/types.hpp"
#include "dockhand/core/validation.hpp"
#include "dockhand/transport/transport.hpp"

namespace dockhand::controller {

class ValidationRejected : public std::runtime_error {
 public:
  explicit ValidationRejected(std::string reason)
      : std::runtime_error("command rejected: " + reason), reason_(std::move(reason)) {}

  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

/// The request pipeline shared by the REST service and the CLI:
/// validate, connect, execute, close. No connection is attempted for a
/// rejected command. Throws ValidationRejected or transport::TransportError.
core::CommandResult execute_on_device(const core::DeviceRecord& device, const core::Credentials& credentials,
                                      std::string_view raw_command, std::int64_t timeout_ms,
                                      const core::ValidationPolicy& policy, transport::TransportProvider& transports);

/// Never throws; an unavailable transport is reported as internal.
transport::ProbeStatus probe_device(const core::DeviceRecord& device, const core::Credentials& credentials,
                                    transport::TransportProvider& transports);

}  // namespace dockhand::controller
