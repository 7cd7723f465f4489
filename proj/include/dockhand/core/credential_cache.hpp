#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>

#include "dockhand/core/types.hpp"

namespace dockhand::core {

/// Opt-in, memory-only credential cache keyed by device. Entries expire after
/// the TTL (default 15 minutes) measured from the last put.
class CredentialCache {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit CredentialCache(std::chrono::milliseconds ttl = std::chrono::minutes(15),
                           Clock clock = [] { return std::chrono::steady_clock::now(); })
      : ttl_(ttl), clock_(std::move(clock)) {}

  void put(const DeviceId& id, Credentials creds) {
    std::lock_guard lock(mutex_);
    entries_[id] = Entry{std::move(creds), clock_() + ttl_};
  }

  std::optional<Credentials> get(const DeviceId& id) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) return std::nullopt;
    if (clock_() >= it->second.expires) {
      entries_.erase(it);
      return std::nullopt;
    }
    return it->second.creds;
  }

  void forget(const DeviceId& id) {
    std::lock_guard lock(mutex_);
    entries_.erase(id);
  }

 private:
  struct Entry {
    Credentials creds;
    std::chrono::steady_clock::time_point expires;
  };

  std::chrono::milliseconds ttl_;
  Clock clock_;
  std::mutex mutex_;
  std::map<DeviceId, Entry> entries_;
};

}  // namespace dockhand::core
