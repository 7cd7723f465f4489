#include "dockhand/core/json_codec.hpp"

#include <stdexcept>

namespace dockhand::core {

using nlohmann::json;

json to_json(const DeviceRecord& rec) {
  return {{"id", rec.id.str()},
          {"name", rec.name},
          {"address", rec.address},
          {"port", rec.port},
          {"transport", to_string(rec.transport)},
          {"created_at", format_timestamp(rec.created_at)},
          {"last_status", to_string(rec.last_status)}};
}

json to_json(const CommandResult& result) {
  return {{"exit_code", result.exit_code},
          {"stdout", result.out},
          {"stderr", result.err},
          {"duration_ms", result.duration_ms},
          {"transport", to_string(result.transport)}};
}

json to_json(const ContainerRecord& rec) {
  return {{"container_id", rec.container_id},
          {"name", rec.name},
          {"image", rec.image},
          {"status", rec.status},
          {"state", to_string(rec.state)}};
}

json to_json(const ImageRecord& rec) {
  return {{"image_id", rec.image_id}, {"repository", rec.repository}, {"tag", rec.tag}, {"size_text", rec.size_text}};
}

json to_json(const VolumeRecord& rec) { return {{"volume_name", rec.volume_name}, {"driver", rec.driver}}; }

CommandResult command_result_from_json(const json& j) {
  try {
    CommandResult r;
    r.exit_code = j.at("exit_code").get<int>();
    r.out = j.at("stdout").get<std::string>();
    r.err = j.at("stderr").get<std::string>();
    r.duration_ms = j.at("duration_ms").get<std::int64_t>();
    auto kind = parse_transport_kind(j.at("transport").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown transport");
    r.transport = *kind;
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed command result: ") + e.what());
  }
}

Credentials credentials_from_json(const json& j) {
  if (j.is_null()) return NoCredentials{};
  if (!j.is_object()) throw std::invalid_argument("credentials must be an object");
  auto field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw std::invalid_argument(std::string("credentials.") + key + " required");
    return it->get<std::string>();
  };
  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) throw std::invalid_argument("credentials.type required");
  auto type = type_it->get<std::string>();
  if (type == "none") return NoCredentials{};
  if (type == "agent_key") return AgentKey{field("key")};
  if (type == "ssh_password") {
    SshPassword c{field("username"), field("password")};
    if (c.username.empty()) throw std::invalid_argument("ssh username must be non-empty");
    return c;
  }
  if (type == "ssh_key") {
    SshKey c{field("username"), field("private_key"), std::nullopt};
    if (c.username.empty()) throw std::invalid_argument("ssh username must be non-empty");
    if (auto it = j.find("passphrase"); it != j.end() && it->is_string()) c.passphrase = it->get<std::string>();
    return c;
  }
  throw std::invalid_argument("unknown credentials.type: " + type);
}

}  // namespace dockhand::core
