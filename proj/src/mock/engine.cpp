#include "dockhand/mock/engine.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dockhand/core/registry.hpp"

namespace dockhand::mock {

using nlohmann::json;

MockState default_seed() {
  MockState s;
  s.containers = {
      {"3f2a9c1b7d4e", "web", "nginx:latest", MockContainerState::running,
       {"nginx: starting worker processes", "nginx: ready on :80", "GET / 200"}},
      {"8b6e0d5a2c91", "db", "postgres:16", MockContainerState::exited,
       {"postgres: initializing", "postgres: ready to accept connections", "postgres: shutting down"}},
  };
  s.images = {
      {"5a1f0e3c2b9d", "nginx", "latest", "187MB"},
      {"7c4d2e1f0a8b", "postgres", "16", "432MB"},
  };
  s.volumes = {{"pgdata", "local"}};
  return s;
}

std::string status_text(MockContainerState state) {
  switch (state) {
    case MockContainerState::running: return "Up (mock)";
    case MockContainerState::exited: return "Exited (0) (mock)";
    case MockContainerState::created: return "Created (mock)";
  }
  return "Created (mock)";
}

namespace {

std::string_view state_name(MockContainerState s) {
  switch (s) {
    case MockContainerState::running: return "running";
    case MockContainerState::exited: return "exited";
    case MockContainerState::created: return "created";
  }
  return "created";
}

std::optional<MockContainerState> parse_state(std::string_view s) {
  if (s == "running") return MockContainerState::running;
  if (s == "exited") return MockContainerState::exited;
  if (s == "created") return MockContainerState::created;
  return std::nullopt;
}

DispatchResult ok(std::string out = {}) { return {0, std::move(out), {}}; }
DispatchResult fail(int code, std::string err) { return {code, {}, std::move(err) + "\n"}; }

using Fields = std::map<std::string, std::string>;

// Go-template subset: {{.Field}} placeholders plus the "\t" escape.
std::optional<std::string> render(std::string_view tmpl, const Fields& fields, std::string& error) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.compare(i, 2, "\\t") == 0) {
      out.push_back('\t');
      i += 2;
    } else if (tmpl.compare(i, 2, "{{") == 0) {
      auto end = tmpl.find("}}", i + 2);
      if (end == std::string_view::npos) {
        error = "template parsing error: unclosed action";
        return std::nullopt;
      }
      std::string key{tmpl.substr(i + 2, end - i - 2)};
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      if (key.empty() || key[0] != '.') {
        error = "template parsing error: unsupported action " + key;
        return std::nullopt;
      }
      auto it = fields.find(key.substr(1));
      if (it == fields.end()) {
        error = "template: can't evaluate field " + key.substr(1);
        return std::nullopt;
      }
      out += it->second;
      i = end + 2;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

Fields container_fields(const MockContainer& c) {
  return {{"ID", c.id},
          {"Names", c.name},
          {"Image", c.image},
          {"Status", status_text(c.state)},
          {"State", std::string(state_name(c.state))}};
}

Fields image_fields(const MockImage& im) {
  return {{"ID", im.id}, {"Repository", im.repository}, {"Tag", im.tag}, {"Size", im.size_text}};
}

Fields volume_fields(const MockVolume& v) { return {{"Name", v.name}, {"Driver", v.driver}}; }

struct ListingArgs {
  bool all = false;
  std::optional<std::string> format;
  std::vector<std::string> filters;
  std::optional<std::string> error;
};

ListingArgs parse_listing_args(const std::vector<std::string>& args, std::size_t from) {
  ListingArgs la;
  for (std::size_t i = from; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "-a" || a == "--all") la.all = true;
    else if (a == "--no-stream" || a == "--no-trunc" || a == "-q") continue;
    else if (a == "--format" && i + 1 < args.size()) la.format = args[++i];
    else if ((a == "--filter" || a == "-f") && i + 1 < args.size()) la.filters.push_back(args[++i]);
    else if (a.starts_with("--format=")) la.format = a.substr(9);
    else if (a.starts_with("--filter=")) la.filters.push_back(a.substr(9));
    else la.error = "unknown flag: " + a;
  }
  return la;
}

template <typename T>
DispatchResult render_rows(const std::vector<const T*>& rows, const ListingArgs& la, Fields (*fields_of)(const T&),
                           std::string_view default_header, std::string_view default_tmpl) {
  std::string out;
  std::string error;
  if (!la.format) out += std::string(default_header) + "\n";
  std::string tmpl = la.format ? *la.format : std::string(default_tmpl);
  for (const T* row : rows) {
    auto line = render(tmpl, fields_of(*row), error);
    if (!line) return fail(1, error);
    out += *line + "\n";
  }
  return ok(std::move(out));
}

MockContainer* find_container(MockState& s, std::string_view ref) {
  for (auto& c : s.containers)
    if (c.id == ref || c.name == ref) return &c;
  // unique id prefix, like the real engine
  MockContainer* match = nullptr;
  for (auto& c : s.containers)
    if (ref.size() >= 3 && c.id.starts_with(ref)) {
      if (match) return nullptr;
      match = &c;
    }
  return match;
}

std::string fresh_id(MockState& s) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c0de%08llx", static_cast<unsigned long long>(s.next_id++));
  return buf;
}

DispatchResult cmd_ps(MockState& s, const std::vector<std::string>& args) {
  auto la = parse_listing_args(args, 1);
  if (la.error) return fail(1, *la.error);
  std::vector<const MockContainer*> rows;
  for (const auto& c : s.containers) {
    if (!la.all && c.state != MockContainerState::running) continue;
    bool keep = true;
    for (const auto& f : la.filters) {
      if (f.starts_with("name=")) keep = keep && c.name.find(f.substr(5)) != std::string::npos;
      else if (f.starts_with("status=")) keep = keep && state_name(c.state) == f.substr(7);
      else if (f.starts_with("id=")) keep = keep && c.id.starts_with(f.substr(3));
      else return fail(1, "invalid filter '" + f + "'");
    }
    if (keep) rows.push_back(&c);
  }
  return render_rows(rows, la, &container_fields, "CONTAINER ID\tNAMES\tIMAGE\tSTATUS",
                     "{{.ID}}\t{{.Names}}\t{{.Image}}\t{{.Status}}");
}

DispatchResult cmd_images(MockState& s, const std::vector<std::string>& args) {
  auto la = parse_listing_args(args, 1);
  if (la.error) return fail(1, *la.error);
  std::vector<const MockImage*> rows;
  for (const auto& im : s.images) rows.push_back(&im);
  return render_rows(rows, la, &image_fields, "IMAGE ID\tREPOSITORY\tTAG\tSIZE",
                     "{{.ID}}\t{{.Repository}}\t{{.Tag}}\t{{.Size}}");
}

DispatchResult cmd_volume(MockState& s, const std::vector<std::string>& args) {
  if (args.size() < 2) return fail(1, "mock-docker: volume requires a subcommand");
  const auto& sub = args[1];
  if (sub == "ls" || sub == "list") {
    auto la = parse_listing_args(args, 2);
    if (la.error) return fail(1, *la.error);
    std::vector<const MockVolume*> rows;
    for (const auto& v : s.volumes) rows.push_back(&v);
    return render_rows(rows, la, &volume_fields, "VOLUME NAME\tDRIVER", "{{.Name}}\t{{.Driver}}");
  }
  if (sub == "create") {
    if (args.size() < 3) return fail(1, "mock-docker: volume create requires a name");
    const auto& name = args[2];
    if (std::none_of(s.volumes.begin(), s.volumes.end(), [&](const MockVolume& v) { return v.name == name; }))
      s.volumes.push_back({name, "local"});
    return ok(name + "\n");
  }
  if (sub == "rm") {
    if (args.size() < 3) return fail(1, "mock-docker: volume rm requires a name");
    std::string out;
    for (std::size_t i = 2; i < args.size(); ++i) {
      auto it = std::find_if(s.volumes.begin(), s.volumes.end(), [&](const MockVolume& v) { return v.name == args[i]; });
      if (it == s.volumes.end()) return {1, out, "Error response from daemon: get " + args[i] + ": no such volume\n"};
      s.volumes.erase(it);
      out += args[i] + "\n";
    }
    return ok(out);
  }
  return fail(1, "mock-docker: unknown command");
}

enum class Lifecycle { start, stop, restart, rm };

DispatchResult cmd_lifecycle(MockState& s, const std::vector<std::string>& args, Lifecycle op) {
  bool force = false;
  std::vector<std::string> refs;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (op == Lifecycle::rm && (args[i] == "-f" || args[i] == "--force")) force = true;
    else if (args[i].starts_with("-")) return fail(1, "unknown flag: " + args[i]);
    else refs.push_back(args[i]);
  }
  if (refs.empty()) return fail(1, "\"docker " + args[0] + "\" requires at least 1 argument.");

  DispatchResult result = ok();
  for (const auto& ref : refs) {
    auto* c = find_container(s, ref);
    if (!c) {
      result.exit_code = 1;
      result.err += "Error response from daemon: No such container: " + ref + "\n";
      continue;
    }
    switch (op) {
      case Lifecycle::start: c->state = MockContainerState::running; break;
      case Lifecycle::stop:
        if (c->state == MockContainerState::running) c->state = MockContainerState::exited;
        break;
      case Lifecycle::restart: c->state = MockContainerState::running; break;
      case Lifecycle::rm:
        if (c->state == MockContainerState::running && !force) {
          result.exit_code = 1;
          result.err += "Error response from daemon: You cannot remove a running container " + c->id +
                        ". Stop the container before attempting removal or force remove\n";
          continue;
        }
        s.containers.erase(s.containers.begin() + (c - s.containers.data()));
        break;
    }
    result.out += ref + "\n";
  }
  return result;
}

DispatchResult cmd_logs(MockState& s, const std::vector<std::string>& args) {
  std::optional<std::size_t> tail;
  std::string ref;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& a = args[i];
    std::string value;
    if ((a == "--tail" || a == "-n") && i + 1 < args.size()) value = args[++i];
    else if (a.starts_with("--tail=")) value = a.substr(7);
    else if (a.starts_with("-")) return fail(1, "unknown flag: " + a);
    else {
      ref = a;
      continue;
    }
    if (value == "all") {
      tail.reset();
      continue;
    }
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (ec != std::errc{} || p != value.data() + value.size()) return fail(1, "invalid tail value: " + value);
    tail = n;
  }
  if (ref.empty()) return fail(1, "\"docker logs\" requires exactly 1 argument.");
  auto* c = find_container(s, ref);
  if (!c) return fail(1, "Error response from daemon: No such container: " + ref);
  std::size_t n = c->logs.size();
  std::size_t first = tail ? n - std::min(*tail, n) : 0;
  std::string out;
  for (std::size_t i = first; i < n; ++i) out += c->logs[i] + "\n";
  return ok(std::move(out));
}

DispatchResult cmd_run(MockState& s, const std::vector<std::string>& args) {
  std::string name;
  std::string image;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--name" && i + 1 < args.size()) name = args[++i];
    else if (a.starts_with("--name=")) name = a.substr(7);
    else if (a == "-d" || a == "--detach" || a == "--rm" || a == "-it" || a == "-i" || a == "-t") continue;
    else if (a.starts_with("-")) return fail(125, "unknown flag: " + a);
    else {
      image = a;
      break;  // remaining words are the container command
    }
  }
  if (image.empty()) return fail(125, "\"docker run\" requires at least 1 argument.");
  auto id = fresh_id(s);
  if (name.empty()) name = "mock_" + id.substr(id.size() - 4);
  for (const auto& c : s.containers)
    if (c.name == name)
      return fail(125, "docker: Error response from daemon: Conflict. The container name \"/" + name +
                           "\" is already in use");
  s.containers.push_back({id, name, image, MockContainerState::running, {"started " + name}});
  return ok(id + "\n");
}

std::pair<std::string, std::string> split_image_ref(const std::string& ref) {
  auto colon = ref.rfind(':');
  auto slash = ref.rfind('/');
  if (colon == std::string::npos || (slash != std::string::npos && colon < slash)) return {ref, "latest"};
  return {ref.substr(0, colon), ref.substr(colon + 1)};
}

DispatchResult cmd_pull(MockState& s, const std::vector<std::string>& args) {
  if (args.size() != 2 || args[1].starts_with("-")) return fail(1, "\"docker pull\" requires exactly 1 argument.");
  auto [repo, tag] = split_image_ref(args[1]);
  for (const auto& im : s.images)
    if (im.repository == repo && im.tag == tag) return ok("Status: Image is up to date for " + repo + ":" + tag + "\n");
  char buf[16];
  std::snprintf(buf, sizeof buf, "1ma9e%07llx", static_cast<unsigned long long>(s.next_id++));
  s.images.push_back({buf, repo, tag, "10MB"});
  return ok("Status: Downloaded newer image for " + repo + ":" + tag + "\n");
}

DispatchResult cmd_rmi(MockState& s, const std::vector<std::string>& args) {
  if (args.size() < 2) return fail(1, "\"docker rmi\" requires at least 1 argument.");
  DispatchResult result = ok();
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& ref = args[i];
    auto [repo, tag] = split_image_ref(ref);
    auto it = std::find_if(s.images.begin(), s.images.end(), [&](const MockImage& im) {
      return im.id == ref || (im.repository == repo && im.tag == tag);
    });
    if (it == s.images.end()) {
      result.exit_code = 1;
      result.err += "Error response from daemon: No such image: " + ref + "\n";
      continue;
    }
    auto full = it->repository + ":" + it->tag;
    bool in_use = std::any_of(s.containers.begin(), s.containers.end(), [&](const MockContainer& c) {
      return c.image == full || (it->tag == "latest" && c.image == it->repository);
    });
    if (in_use) {
      result.exit_code = 1;
      result.err += "Error response from daemon: conflict: unable to remove repository reference \"" + ref +
                    "\" - container is using its referenced image\n";
      continue;
    }
    result.out += "Untagged: " + full + "\nDeleted: " + it->id + "\n";
    s.images.erase(it);
  }
  return result;
}

DispatchResult cmd_inspect(MockState& s, const std::vector<std::string>& args) {
  json arr = json::array();
  DispatchResult result;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i].starts_with("-")) continue;
    auto* c = find_container(s, args[i]);
    if (!c) {
      result.exit_code = 1;
      result.err += "Error: No such object: " + args[i] + "\n";
      continue;
    }
    arr.push_back({{"Id", c->id},
                   {"Name", "/" + c->name},
                   {"State", {{"Status", state_name(c->state)}, {"Running", c->state == MockContainerState::running}}},
                   {"Config", {{"Image", c->image}}}});
  }
  if (args.size() < 2) return fail(1, "\"docker inspect\" requires at least 1 argument.");
  result.out = arr.dump(4) + "\n";
  return result;
}

DispatchResult cmd_stats(MockState& s, const std::vector<std::string>& args) {
  auto la = parse_listing_args(args, 1);
  if (la.error) return fail(1, *la.error);
  std::string out = "CONTAINER ID\tNAME\tCPU %\tMEM USAGE\n";
  for (const auto& c : s.containers)
    if (c.state == MockContainerState::running) out += c.id + "\t" + c.name + "\t0.00%\t1MiB\n";
  return ok(std::move(out));
}

DispatchResult cmd_info(MockState& s) {
  auto running = std::count_if(s.containers.begin(), s.containers.end(),
                               [](const MockContainer& c) { return c.state == MockContainerState::running; });
  std::ostringstream out;
  out << "Containers: " << s.containers.size() << "\n"
      << " Running: " << running << "\n"
      << " Stopped: " << (static_cast<long>(s.containers.size()) - running) << "\n"
      << "Images: " << s.images.size() << "\n"
      << "Volumes: " << s.volumes.size() << "\n"
      << "Server Version: " << s.version_string << "\n";
  return ok(out.str());
}

}  // namespace

DispatchResult dispatch(MockState& state, const std::vector<std::string>& args) {
  try {
    if (args.empty()) return fail(1, "mock-docker: unknown command");
    const auto& cmd = args[0];
    if (cmd == "version" || cmd == "--version") return ok(state.version_string + "\n");
    if (cmd == "info") return cmd_info(state);
    if (cmd == "ps") return cmd_ps(state, args);
    if (cmd == "images") return cmd_images(state, args);
    if (cmd == "volume") return cmd_volume(state, args);
    if (cmd == "start") return cmd_lifecycle(state, args, Lifecycle::start);
    if (cmd == "stop") return cmd_lifecycle(state, args, Lifecycle::stop);
    if (cmd == "restart") return cmd_lifecycle(state, args, Lifecycle::restart);
    if (cmd == "rm") return cmd_lifecycle(state, args, Lifecycle::rm);
    if (cmd == "logs") return cmd_logs(state, args);
    if (cmd == "run") return cmd_run(state, args);
    if (cmd == "pull") return cmd_pull(state, args);
    if (cmd == "rmi") return cmd_rmi(state, args);
    if (cmd == "inspect") return cmd_inspect(state, args);
    if (cmd == "stats") return cmd_stats(state, args);
    return fail(1, "mock-docker: unknown command");
  } catch (const std::exception& e) {
    return fail(1, std::string("mock-docker: ") + e.what());
  }
}

std::string to_json_text(const MockState& state) {
  json containers = json::array();
  for (const auto& c : state.containers)
    containers.push_back(
        {{"id", c.id}, {"name", c.name}, {"image", c.image}, {"state", state_name(c.state)}, {"logs", c.logs}});
  json images = json::array();
  for (const auto& im : state.images)
    images.push_back({{"id", im.id}, {"repository", im.repository}, {"tag", im.tag}, {"size_text", im.size_text}});
  json volumes = json::array();
  for (const auto& v : state.volumes) volumes.push_back({{"name", v.name}, {"driver", v.driver}});
  json doc = {{"version_string", state.version_string},
              {"next_id", state.next_id},
              {"containers", containers},
              {"images", images},
              {"volumes", volumes}};
  return doc.dump(2) + "\n";
}

MockState from_json_text(const std::string& text) {
  try {
    auto doc = json::parse(text);
    MockState s;
    s.version_string = doc.value("version_string", std::string(kVersionString));
    s.next_id = doc.value("next_id", std::uint64_t{1});
    for (const auto& c : doc.at("containers")) {
      auto st = parse_state(c.at("state").get<std::string>());
      if (!st) throw std::runtime_error("bad container state");
      s.containers.push_back({c.at("id"), c.at("name"), c.at("image"), *st,
                              c.value("logs", std::vector<std::string>{})});
    }
    for (const auto& im : doc.at("images"))
      s.images.push_back({im.at("id"), im.at("repository"), im.at("tag"), im.at("size_text")});
    for (const auto& v : doc.at("volumes")) s.volumes.push_back({v.at("name"), v.at("driver")});
    return s;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed mock state: ") + e.what());
  }
}

void seed_state(const std::filesystem::path& path, const MockState& state) {
  core::write_file_atomic(path, to_json_text(state));
}

MockState load_state(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    auto seed = default_seed();
    seed_state(path, seed);
    return seed;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

namespace {

class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0600);
    if (fd_ >= 0) ::flock(fd_, LOCK_EX);
  }
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

DispatchResult run(const std::filesystem::path& state_path, std::vector<std::string> args) {
  for (auto it = args.begin(); it != args.end();) {
    if (*it == "--sleep-ms" && std::next(it) != args.end()) {
      long long ms = 0;
      const auto& v = *std::next(it);
      std::from_chars(v.data(), v.data() + v.size(), ms);
      if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
      it = args.erase(it, std::next(it, 2));
    } else {
      ++it;
    }
  }
  try {
    auto lock_path = state_path;
    lock_path += ".lock";
    FileLock lock(lock_path);
    auto state = load_state(state_path);
    auto before = state;
    auto result = dispatch(state, args);
    if (!(state == before)) seed_state(state_path, state);
    return result;
  } catch (const std::exception& e) {
    return fail(1, std::string("mock-docker: ") + e.what());
  }
}

}  // namespace dockhand::mock
