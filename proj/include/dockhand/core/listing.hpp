#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dockhand::core {

enum class ListingKind { containers_all, images, volumes };

enum class ContainerState { running, exited, created, paused, other };

std::string_view to_string(ContainerState state);

/// Derived from the status text prefix: "Up" running, "Exited" exited,
/// "Created" created, "Paused" paused, anything else other.
ContainerState state_from_status(std::string_view status);

struct ContainerRecord {
  std::string container_id;
  std::string name;
  std::string image;
  std::string status;
  ContainerState state = ContainerState::other;

  bool operator==(const ContainerRecord&) const = default;
};

struct ImageRecord {
  std::string image_id;
  std::string repository;
  std::string tag;
  std::string size_text;

  bool operator==(const ImageRecord&) const = default;
};

struct VolumeRecord {
  std::string volume_name;
  std::string driver;

  bool operator==(const VolumeRecord&) const = default;
};

using ListingRecords =
    std::variant<std::vector<ContainerRecord>, std::vector<ImageRecord>, std::vector<VolumeRecord>>;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line_no, const std::string& detail)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + detail), line_no_(line_no) {}

  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

/// Matches container ids and names accepted by lifecycle endpoints: [A-Za-z0-9_.-]{1,128}.
bool is_valid_container_ref(std::string_view ref);

/// Builds the engine listing command. Fields are TAB-separated inside a
/// single-quoted --format template. A container_filter must satisfy
/// is_valid_container_ref (std::invalid_argument otherwise) and is ignored for
/// images and volumes.
std::string build_listing_command(ListingKind kind,
                                  const std::optional<std::string>& container_filter = std::nullopt);

std::vector<ContainerRecord> parse_containers(std::string_view text);
std::vector<ImageRecord> parse_images(std::string_view text);
std::vector<VolumeRecord> parse_volumes(std::string_view text);

/// One record per non-empty line; throws ParseError on a wrong field count.
ListingRecords parse_listing(ListingKind kind, std::string_view text);

}  // namespace dockhand::core
