#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <mutex>
#include <thread>

namespace dockhand::controller {

/// Runs submitted jobs one at a time, in arrival order, on a dedicated
/// thread. A job still queued after `max_wait` is abandoned: its on_expired
/// callback runs instead of the job.
class SerialExecutor {
 public:
  explicit SerialExecutor(std::chrono::milliseconds max_wait) : max_wait_(max_wait), worker_([this] { loop(); }) {}

  ~SerialExecutor() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
    worker_.join();
  }

  SerialExecutor(const SerialExecutor&) = delete;
  SerialExecutor& operator=(const SerialExecutor&) = delete;

  void submit(std::function<void()> job, std::function<void()> on_expired) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back({std::move(job), std::move(on_expired), std::chrono::steady_clock::now()});
    }
    cv_.notify_one();
  }

 private:
  struct Item {
    std::function<void()> job;
    std::function<void()> on_expired;
    std::chrono::steady_clock::time_point enqueued;
  };

  void loop() {
    while (true) {
      Item item;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        item = std::move(queue_.front());
        queue_.pop_front();
      }
      if (std::chrono::steady_clock::now() - item.enqueued > max_wait_) item.on_expired();
      else item.job();
    }
  }

  std::chrono::milliseconds max_wait_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Item> queue_;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace dockhand::controller
