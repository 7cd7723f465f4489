#include "dockhand/core/types.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <mutex>
#include <random>

namespace dockhand::core {

std::string_view to_string(TransportKind kind) {
  switch (kind) {
    case TransportKind::ssh: return "ssh";
    case TransportKind::http_agent: return "http_agent";
    case TransportKind::local: return "local";
  }
  return "unknown";
}

std::optional<TransportKind> parse_transport_kind(std::string_view text) {
  if (text == "ssh") return TransportKind::ssh;
  if (text == "http_agent") return TransportKind::http_agent;
  if (text == "local") return TransportKind::local;
  return std::nullopt;
}

std::string_view to_string(DeviceStatus status) {
  switch (status) {
    case DeviceStatus::unknown: return "unknown";
    case DeviceStatus::reachable: return "reachable";
    case DeviceStatus::unreachable: return "unreachable";
  }
  return "unknown";
}

std::optional<DeviceStatus> parse_device_status(std::string_view text) {
  if (text == "unknown") return DeviceStatus::unknown;
  if (text == "reachable") return DeviceStatus::reachable;
  if (text == "unreachable") return DeviceStatus::unreachable;
  return std::nullopt;
}

Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::microseconds>(std::chrono::system_clock::now());
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  auto secs = floor<seconds>(ts);
  auto micros = (ts - secs).count();
  std::time_t t = system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<long long>(micros));
  return buf.data();
}

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  auto first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, out);
  return ec == std::errc{} && ptr == first + len;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS.ffffffZ
  if (text.size() != 27 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
      text[16] != ':' || text[19] != '.' || text[26] != 'Z')
    return std::nullopt;
  int year, mon, day, hour, min, sec, micros;
  if (!read_int(text, 0, 4, year) || !read_int(text, 5, 2, mon) || !read_int(text, 8, 2, day) ||
      !read_int(text, 11, 2, hour) || !read_int(text, 14, 2, min) || !read_int(text, 17, 2, sec) ||
      !read_int(text, 20, 6, micros))
    return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, month{static_cast<unsigned>(mon)},
                     std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || min > 59 || sec > 60) return std::nullopt;
  return sys_days{ymd} + hours{hour} + minutes{min} + seconds{sec} + microseconds{micros};
}

DeviceId DeviceId::generate() {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::uint64_t hi, lo;
  {
    std::lock_guard lock(mutex);
    hi = rng();
    lo = rng();
  }
  std::array<char, 33> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return DeviceId{buf.data()};
}

bool DeviceId::is_well_formed(std::string_view text) {
  if (text.size() != 32) return false;
  for (char c : text)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

std::string_view credential_kind(const Credentials& creds) {
  struct Visitor {
    std::string_view operator()(const NoCredentials&) const { return "none"; }
    std::string_view operator()(const SshPassword&) const { return "ssh_password"; }
    std::string_view operator()(const SshKey&) const { return "ssh_key"; }
    std::string_view operator()(const AgentKey&) const { return "agent_key"; }
  };
  return std::visit(Visitor{}, creds);
}

std::string to_valid_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  const auto* s = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  while (i < n) {
    unsigned char c = s[i];
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    }
    bool ok = len != 0 && i + len <= n;
    for (std::size_t k = 1; ok && k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    // reject overlongs, surrogates, out-of-range
    if (ok) {
      if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
          cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
        ok = false;
    }
    if (ok) {
      out.append(bytes.substr(i, len));
      i += len;
    } else {
      out.append("\xEF\xBF\xBD");
      ++i;
    }
  }
  return out;
}

}  // namespace dockhand::core
