#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dockhand::mock {

enum class MockContainerState { created, running, exited };

struct MockContainer {
  std::string id;
  std::string name;
  std::string image;
  MockContainerState state = MockContainerState::created;
  std::vector<std::string> logs;

  bool operator==(const MockContainer&) const = default;
};

struct MockImage {
  std::string id;
  std::string repository;
  std::string tag;
  std::string size_text;

  bool operator==(const MockImage&) const = default;
};

struct MockVolume {
  std::string name;
  std::string driver;

  bool operator==(const MockVolume&) const = default;
};

inline constexpr const char* kVersionString = "mock-docker 1.0";
inline constexpr const char* kStateEnv = "MOCKDOCKER_STATE";

struct MockState {
  std::vector<MockContainer> containers;
  std::vector<MockImage> images;
  std::vector<MockVolume> volumes;
  std::string version_string = kVersionString;
  std::uint64_t next_id = 1;

  bool operator==(const MockState&) const = default;
};

/// Two containers (web running, db exited), two images, one volume.
MockState default_seed();

std::string status_text(MockContainerState state);

struct DispatchResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

/// Applies one engine invocation (argv without the program name) to state.
/// Never throws; failures are exit codes.
DispatchResult dispatch(MockState& state, const std::vector<std::string>& args);

std::string to_json_text(const MockState& state);
/// Throws std::runtime_error on malformed input.
MockState from_json_text(const std::string& text);

/// Writes state to path atomically.
void seed_state(const std::filesystem::path& path, const MockState& state);

/// Reads path, writing default_seed() first when the file does not exist.
MockState load_state(const std::filesystem::path& path);

/// Full invocation: strips --sleep-ms N (sleeping first), then locks the state
/// file, loads, dispatches and saves when the state changed.
DispatchResult run(const std::filesystem::path& state_path, std::vector<std::string> args);

}  // namespace dockhand::mock
