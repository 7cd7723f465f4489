#include "dockhand/core/registry.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

namespace dockhand::core {

using nlohmann::json;

std::string_view to_string(RegistryError::Code code) {
  switch (code) {
    case RegistryError::Code::invalid_address: return "invalid_address";
    case RegistryError::Code::invalid_port: return "invalid_port";
    case RegistryError::Code::invalid_transport: return "invalid_transport";
    case RegistryError::Code::not_found: return "not_found";
    case RegistryError::Code::io_error: return "io_error";
    case RegistryError::Code::corrupt_store: return "corrupt_store";
  }
  return "internal";
}

bool is_valid_address(std::string_view address) {
  if (address.empty() || address.size() > 253 || address.front() == '-') return false;
  return std::all_of(address.begin(), address.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
           c == '-' || c == '_' || c == ':';
  });
}

RegistryStore::RegistryStore(std::vector<DeviceRecord> records, bool allow_local) : allow_local_(allow_local) {
  for (auto& r : records) {
    auto id = r.id;
    devices_.emplace(std::move(id), std::move(r));
  }
}

DeviceRecord RegistryStore::add(std::string name, std::string address, int port, TransportKind transport) {
  if (!is_valid_address(address))
    throw RegistryError(RegistryError::Code::invalid_address, "address must be a non-empty hostname or IP");
  if (port < 1 || port > 65535)
    throw RegistryError(RegistryError::Code::invalid_port, "port must be in 1..65535");
  if (transport == TransportKind::local && !allow_local_)
    throw RegistryError(RegistryError::Code::invalid_transport, "local transport is disabled");

  DeviceRecord rec;
  rec.name = std::move(name);
  rec.address = std::move(address);
  rec.port = static_cast<std::uint16_t>(port);
  rec.transport = transport;
  rec.created_at = now_utc();

  std::unique_lock lock(mutex_);
  do {
    rec.id = DeviceId::generate();
  } while (devices_.contains(rec.id));
  devices_.emplace(rec.id, rec);
  return rec;
}

std::vector<DeviceRecord> RegistryStore::list() const {
  std::vector<DeviceRecord> out;
  {
    std::shared_lock lock(mutex_);
    out.reserve(devices_.size());
    for (const auto& [id, rec] : devices_) out.push_back(rec);
  }
  std::sort(out.begin(), out.end(), [](const DeviceRecord& a, const DeviceRecord& b) {
    if (a.created_at != b.created_at) return a.created_at < b.created_at;
    return a.id < b.id;
  });
  return out;
}

DeviceRecord RegistryStore::get(const DeviceId& id) const {
  std::shared_lock lock(mutex_);
  auto it = devices_.find(id);
  if (it == devices_.end()) throw RegistryError(RegistryError::Code::not_found, "no such device: " + id.str());
  return it->second;
}

DeviceRecord RegistryStore::remove(const DeviceId& id) {
  std::unique_lock lock(mutex_);
  auto it = devices_.find(id);
  if (it == devices_.end()) throw RegistryError(RegistryError::Code::not_found, "no such device: " + id.str());
  auto rec = std::move(it->second);
  devices_.erase(it);
  return rec;
}

void RegistryStore::set_status(const DeviceId& id, DeviceStatus status) {
  std::unique_lock lock(mutex_);
  auto it = devices_.find(id);
  if (it == devices_.end()) throw RegistryError(RegistryError::Code::not_found, "no such device: " + id.str());
  it->second.last_status = status;
}

std::size_t RegistryStore::size() const {
  std::shared_lock lock(mutex_);
  return devices_.size();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
  if (fd < 0)
    throw RegistryError(RegistryError::Code::io_error, "cannot open " + tmp.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < data.size()) {
    auto n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      int e = errno;
      ::close(fd);
      ::unlink(tmp.c_str());
      throw RegistryError(RegistryError::Code::io_error, "write failed: " + std::string(std::strerror(e)));
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    int e = errno;
    ::unlink(tmp.c_str());
    throw RegistryError(RegistryError::Code::io_error, "rename failed: " + std::string(std::strerror(e)));
  }
}

void RegistryStore::save(const std::filesystem::path& path) const {
  json devices = json::array();
  for (const auto& rec : list()) {
    devices.push_back({{"id", rec.id.str()},
                       {"name", rec.name},
                       {"address", rec.address},
                       {"port", rec.port},
                       {"transport", to_string(rec.transport)},
                       {"created_at", format_timestamp(rec.created_at)},
                       {"last_status", to_string(rec.last_status)}});
  }
  json doc = {{"version", 1}, {"devices", std::move(devices)}};
  write_file_atomic(path, doc.dump(2) + "\n");
}

namespace {

[[noreturn]] void corrupt(const std::string& why) {
  throw RegistryError(RegistryError::Code::corrupt_store, "corrupt device store: " + why);
}

DeviceRecord record_from_json(const json& j) {
  if (!j.is_object()) corrupt("device entry is not an object");
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) corrupt(std::string("missing string field ") + key);
    return it->get<std::string>();
  };
  DeviceRecord rec;
  rec.id = DeviceId{str("id")};
  if (!DeviceId::is_well_formed(rec.id.str())) corrupt("malformed id");
  rec.name = str("name");
  rec.address = str("address");
  if (!is_valid_address(rec.address)) corrupt("invalid address");
  auto port = j.find("port");
  if (port == j.end() || !port->is_number_integer()) corrupt("missing port");
  auto p = port->get<std::int64_t>();
  if (p < 1 || p > 65535) corrupt("port out of range");
  rec.port = static_cast<std::uint16_t>(p);
  auto kind = parse_transport_kind(str("transport"));
  if (!kind) corrupt("unknown transport");
  rec.transport = *kind;
  auto ts = parse_timestamp(str("created_at"));
  if (!ts) corrupt("bad created_at");
  rec.created_at = *ts;
  auto status = parse_device_status(str("last_status"));
  if (!status) corrupt("bad last_status");
  rec.last_status = *status;
  return rec;
}

}  // namespace

RegistryStore RegistryStore::load(const std::filesystem::path& path, bool allow_local) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RegistryError(RegistryError::Code::io_error, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto text = buf.str();
  if (text.empty()) corrupt("empty file");

  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) corrupt("not a JSON object");
  auto version = doc.find("version");
  if (version == doc.end() || !version->is_number_integer() || version->get<int>() != 1)
    corrupt("unsupported version");
  auto devices = doc.find("devices");
  if (devices == doc.end() || !devices->is_array()) corrupt("missing devices array");

  std::vector<DeviceRecord> records;
  std::map<DeviceId, bool> seen;
  for (const auto& entry : *devices) {
    auto rec = record_from_json(entry);
    if (seen.contains(rec.id)) corrupt("duplicate id " + rec.id.str());
    seen[rec.id] = true;
    records.push_back(std::move(rec));
  }
  return RegistryStore(std::move(records), allow_local);
}

}  // namespace dockhand::core
