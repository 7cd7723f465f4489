#pragma once

#include <json.hpp>

#include "dockhand/core/listing.hpp"
#include "dockhand/core/types.hpp"

namespace dockhand::core {

nlohmann::json to_json(const DeviceRecord& rec);
nlohmann::json to_json(const CommandResult& result);
nlohmann::json to_json(const ContainerRecord& rec);
nlohmann::json to_json(const ImageRecord& rec);
nlohmann::json to_json(const VolumeRecord& rec);

/// Throws std::invalid_argument on a malformed document.
CommandResult command_result_from_json(const nlohmann::json& j);

/// Accepts {"type": "ssh_password"|"ssh_key"|"agent_key"|"none", ...}; a null
/// or absent document means none. Throws std::invalid_argument when malformed
/// or when an ssh variant has an empty username.
Credentials credentials_from_json(const nlohmann::json& j);

}  // namespace dockhand::core
