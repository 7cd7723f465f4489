#include "dockhand/core/listing.hpp"

#include <algorithm>
#include <cctype>

namespace dockhand::core {

std::string_view to_string(ContainerState state) {
  switch (state) {
    case ContainerState::running: return "running";
    case ContainerState::exited: return "exited";
    case ContainerState::created: return "created";
    case ContainerState::paused: return "paused";
    case ContainerState::other: return "other";
  }
  return "other";
}

ContainerState state_from_status(std::string_view status) {
  if (status.starts_with("Up")) return ContainerState::running;
  if (status.starts_with("Exited")) return ContainerState::exited;
  if (status.starts_with("Created")) return ContainerState::created;
  if (status.starts_with("Paused")) return ContainerState::paused;
  return ContainerState::other;
}

bool is_valid_container_ref(std::string_view ref) {
  if (ref.empty() || ref.size() > 128 || !std::isalnum(static_cast<unsigned char>(ref.front()))) return false;
  return std::all_of(ref.begin(), ref.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '.' || c == '-';
  });
}

std::string build_listing_command(ListingKind kind, const std::optional<std::string>& container_filter) {
  switch (kind) {
    case ListingKind::containers_all: {
      std::string cmd = "docker ps -a";
      if (container_filter) {
        if (!is_valid_container_ref(*container_filter))
          throw std::invalid_argument("invalid container filter");
        cmd += " --filter name=" + *container_filter;
      }
      return cmd + " --format '{{.ID}}\t{{.Names}}\t{{.Image}}\t{{.Status}}'";
    }
    case ListingKind::images:
      return "docker images --format '{{.ID}}\t{{.Repository}}\t{{.Tag}}\t{{.Size}}'";
    case ListingKind::volumes:
      return "docker volume ls --format '{{.Name}}\t{{.Driver}}'";
  }
  return {};
}

namespace {

// Calls fn(line_no, fields) for every non-empty line.
template <typename Fn>
void for_each_row(std::string_view text, std::size_t expected_fields, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != expected_fields)
      throw ParseError(line_no, "expected " + std::to_string(expected_fields) + " fields, got " +
                                    std::to_string(fields.size()));
    if (fields[0].empty()) throw ParseError(line_no, "empty identifier");
    fn(fields);
  }
}

}  // namespace

std::vector<ContainerRecord> parse_containers(std::string_view text) {
  std::vector<ContainerRecord> out;
  for_each_row(text, 4, [&](std::vector<std::string>& f) {
    auto state = state_from_status(f[3]);
    out.push_back({std::move(f[0]), std::move(f[1]), std::move(f[2]), std::move(f[3]), state});
  });
  return out;
}

std::vector<ImageRecord> parse_images(std::string_view text) {
  std::vector<ImageRecord> out;
  for_each_row(text, 4, [&](std::vector<std::string>& f) {
    out.push_back({std::move(f[0]), std::move(f[1]), std::move(f[2]), std::move(f[3])});
  });
  return out;
}

std::vector<VolumeRecord> parse_volumes(std::string_view text) {
  std::vector<VolumeRecord> out;
  for_each_row(text, 2, [&](std::vector<std::string>& f) { out.push_back({std::move(f[0]), std::move(f[1])}); });
  return out;
}

ListingRecords parse_listing(ListingKind kind, std::string_view text) {
  switch (kind) {
    case ListingKind::containers_all: return parse_containers(text);
    case ListingKind::images: return parse_images(text);
    case ListingKind::volumes: return parse_volumes(text);
  }
  return std::vector<ContainerRecord>{};
}

}  // namespace dockhand::core
