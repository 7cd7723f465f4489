#pragma once

#include <filesystem>
#include <map>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "dockhand/core/types.hpp"

namespace dockhand::core {

class RegistryError : public std::runtime_error {
 public:
  enum class Code { invalid_address, invalid_port, invalid_transport, not_found, io_error, corrupt_store };

  RegistryError(Code code, const std::string& detail) : std::runtime_error(detail), code_(code) {}

  Code code() const { return code_; }

 private:
  Code code_;
};

std::string_view to_string(RegistryError::Code code);

/// In-memory device registry. Readers share, writers are exclusive.
///
/// The `local` transport is refused unless the store was created with
/// allow_local (dev/test mode).
class RegistryStore {
 public:
  explicit RegistryStore(bool allow_local = false) : allow_local_(allow_local) {}

  RegistryStore(const RegistryStore&) = delete;
  RegistryStore& operator=(const RegistryStore&) = delete;

  DeviceRecord add(std::string name, std::string address, int port, TransportKind transport);

  /// Ordered by created_at, then id.
  std::vector<DeviceRecord> list() const;
  DeviceRecord get(const DeviceId& id) const;
  DeviceRecord remove(const DeviceId& id);
  void set_status(const DeviceId& id, DeviceStatus status);

  std::size_t size() const;
  bool allow_local() const { return allow_local_; }

  /// Writes {version: 1, devices: [...]} atomically (temp file + rename).
  void save(const std::filesystem::path& path) const;
  static RegistryStore load(const std::filesystem::path& path, bool allow_local = false);

  friend bool operator==(const RegistryStore& a, const RegistryStore& b) { return a.list() == b.list(); }

 private:
  RegistryStore(std::vector<DeviceRecord> records, bool allow_local);

  mutable std::shared_mutex mutex_;
  std::map<DeviceId, DeviceRecord> devices_;
  bool allow_local_;
};

/// Hostnames and IPv4/IPv6 literals; no whitespace and no leading '-'.
bool is_valid_address(std::string_view address);

/// Writes data to path via a sibling temp file, fsync and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

}  // namespace dockhand::core
