#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>
#include <vector>

#include "dockhand/transport/transport.hpp"

namespace dockhand::testing {

/// Single-server fake: each exec holds one shared lock for `service_time`, so
/// concurrent requests queue. Every `fail_every`-th exec (1-based) throws.
class FakeTransport final : public transport::Transport {
 public:
  explicit FakeTransport(std::chrono::microseconds service_time, int fail_every = 0, bool serialize = true)
      : service_time_(service_time), fail_every_(fail_every), serialize_(serialize) {}

  core::TransportKind kind() const override { return core::TransportKind::http_agent; }

  std::unique_ptr<transport::Session> connect(const transport::Endpoint& ep, const core::Credentials&) override {
    ++connects;
    if (unreachable) throw transport::TransportError(transport::ErrorKind::unreachable, "fake: unreachable");
    return std::make_unique<FakeSession>(ep, *this);
  }

  std::atomic<int> connects{0};
  std::atomic<int> execs{0};
  bool unreachable = false;

 private:
  class FakeSession final : public transport::Session {
   public:
    FakeSession(transport::Endpoint ep, FakeTransport& owner) : Session(std::move(ep)), owner_(owner) {}

   protected:
    core::CommandResult do_exec(const core::CommandRequest&) override {
      int n = ++owner_.execs;
      {
        std::unique_lock lock(owner_.server_, std::defer_lock);
        if (owner_.serialize_) lock.lock();
        std::this_thread::sleep_for(owner_.service_time_);
      }
      if (owner_.fail_every_ > 0 && n % owner_.fail_every_ == 0)
        throw transport::TransportError(transport::ErrorKind::timeout, "fake: injected failure");
      return {0, "ok\n", "", 0, core::TransportKind::http_agent};
    }

   private:
    FakeTransport& owner_;
  };

  std::chrono::microseconds service_time_;
  int fail_every_;
  bool serialize_;
  std::mutex server_;
};

/// Nearest-rank percentile by sorting a copy; pct is an integer percentage.
inline double sorted_percentile(std::vector<double> v, int pct) {
  std::sort(v.begin(), v.end());
  std::size_t rank = (static_cast<std::size_t>(pct) * v.size() + 99) / 100;
  if (rank < 1) rank = 1;
  return v[rank - 1];
}

}  // namespace dockhand::testing
