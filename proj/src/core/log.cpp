#include "dockhand/core/log.hpp"

#include <iostream>
#include <mutex>

#include "dockhand/core/types.hpp"

namespace dockhand::log {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink;
  return sink;
}

std::string_view level_name(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "info";
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  current_sink() = std::move(sink);
}

void write(Level level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) {
    current_sink()(level, message);
    return;
  }
  if (level == Level::debug) return;
  std::clog << core::format_timestamp(core::now_utc()) << ' ' << level_name(level) << ' ' << message << '\n';
}

}  // namespace dockhand::log
