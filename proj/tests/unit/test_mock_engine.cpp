#include <doctest.h>

#include <map>
#include <random>

#include <json.hpp>

#include "dockhand/core/listing.hpp"
#include "dockhand/mock/engine.hpp"
#include "support/temp_dir.hpp"

using namespace dockhand::mock;
using dockhand::testing::TempDir;

namespace {

const std::string kContainersFormat = "{{.ID}}\t{{.Names}}\t{{.Image}}\t{{.Status}}";

DispatchResult d(MockState& s, std::vector<std::string> args) { return dispatch(s, args); }

}  // namespace

TEST_CASE("seed contents") {
  auto s = default_seed();
  REQUIRE(s.containers.size() == 2);
  CHECK(s.containers[0].name == "web");
  CHECK(s.containers[0].state == MockContainerState::running);
  CHECK(s.containers[1].name == "db");
  CHECK(s.containers[1].state == MockContainerState::exited);
  CHECK(s.images.size() == 2);
  CHECK(s.volumes.size() == 1);
}

TEST_CASE("version and unknown commands") {
  auto s = default_seed();
  auto r = d(s, {"version"});
  CHECK(r.exit_code == 0);
  CHECK(r.out == "mock-docker 1.0\n");
  r = d(s, {"exec", "web", "sh"});
  CHECK(r.exit_code == 1);
  CHECK(r.err == "mock-docker: unknown command\n");
  CHECK(d(s, {}).exit_code == 1);
}

TEST_CASE("ps honours -a, filters and templates") {
  auto s = default_seed();
  auto r = d(s, {"ps", "-a", "--format", kContainersFormat});
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "3f2a9c1b7d4e\tweb\tnginx:latest\tUp (mock)\n"
        "8b6e0d5a2c91\tdb\tpostgres:16\tExited (0) (mock)\n");
  r = d(s, {"ps", "--format", "{{.Names}}"});
  CHECK(r.out == "web\n");
  r = d(s, {"ps", "-a", "--filter", "name=db", "--format", "{{.Names}}"});
  CHECK(r.out == "db\n");
  r = d(s, {"ps", "-a", "--filter", "status=running", "--format", "{{.ID}}"});
  CHECK(r.out == "3f2a9c1b7d4e\n");
  r = d(s, {"ps"});
  CHECK(r.out.starts_with("CONTAINER ID\t"));
  CHECK(d(s, {"ps", "--format", "{{.Nope}}"}).exit_code == 1);
  CHECK(d(s, {"ps", "--bogus"}).exit_code == 1);
}

TEST_CASE("images and volumes") {
  auto s = default_seed();
  CHECK(d(s, {"images", "--format", "{{.ID}}\t{{.Repository}}\t{{.Tag}}\t{{.Size}}"}).out ==
        "5a1f0e3c2b9d\tnginx\tlatest\t187MB\n7c4d2e1f0a8b\tpostgres\t16\t432MB\n");
  CHECK(d(s, {"volume", "ls", "--format", "{{.Name}}\t{{.Driver}}"}).out == "pgdata\tlocal\n");
  CHECK(d(s, {"volume", "create", "cache"}).out == "cache\n");
  CHECK(s.volumes.size() == 2);
  CHECK(d(s, {"volume", "rm", "cache"}).exit_code == 0);
  CHECK(d(s, {"volume", "rm", "cache"}).exit_code == 1);
}

TEST_CASE("lifecycle") {
  auto s = default_seed();
  auto r = d(s, {"start", "db"});
  CHECK(r.exit_code == 0);
  CHECK(r.out == "db\n");
  CHECK(s.containers[1].state == MockContainerState::running);
  CHECK(d(s, {"rm", "db"}).exit_code == 1);
  CHECK(d(s, {"stop", "db"}).exit_code == 0);
  CHECK(d(s, {"rm", "db"}).exit_code == 0);
  CHECK(s.containers.size() == 1);
  r = d(s, {"stop", "ghost"});
  CHECK(r.exit_code == 1);
  CHECK(r.err == "Error response from daemon: No such container: ghost\n");
  CHECK(d(s, {"rm", "-f", "web"}).exit_code == 0);
  CHECK(s.containers.empty());
}

TEST_CASE("ids resolve by unique prefix") {
  auto s = default_seed();
  CHECK(d(s, {"stop", "3f2a"}).exit_code == 0);
  CHECK(s.containers[0].state == MockContainerState::exited);
  CHECK(d(s, {"stop", "3f"}).exit_code == 1);
}

TEST_CASE("logs") {
  auto s = default_seed();
  CHECK(d(s, {"logs", "db"}).out ==
        "postgres: initializing\npostgres: ready to accept connections\npostgres: shutting down\n");
  CHECK(d(s, {"logs", "--tail", "2", "db"}).out == "postgres: ready to accept connections\npostgres: shutting down\n");
  CHECK(d(s, {"logs", "--tail", "0", "db"}).out.empty());
  CHECK(d(s, {"logs", "--tail", "99", "db"}).out.size() == d(s, {"logs", "db"}).out.size());
  CHECK(d(s, {"logs", "--tail", "x", "db"}).exit_code == 1);
  CHECK(d(s, {"logs", "ghost"}).exit_code == 1);
}

TEST_CASE("run, pull and rmi") {
  auto s = default_seed();
  auto r = d(s, {"run", "-d", "--name", "cache", "redis:7"});
  CHECK(r.exit_code == 0);
  CHECK(r.out == "c0de00000001\n");
  CHECK(s.containers.back().state == MockContainerState::running);
  CHECK(d(s, {"run", "--name", "cache", "redis:7"}).exit_code == 125);
  CHECK(d(s, {"pull", "redis:7"}).exit_code == 0);
  CHECK(s.images.size() == 3);
  CHECK(d(s, {"rmi", "redis:7"}).exit_code == 1);
  CHECK(d(s, {"rm", "-f", "cache"}).exit_code == 0);
  CHECK(d(s, {"rmi", "redis:7"}).exit_code == 0);
  CHECK(s.images.size() == 2);
}

TEST_CASE("inspect, info and stats") {
  auto s = default_seed();
  auto r = d(s, {"inspect", "web"});
  REQUIRE(r.exit_code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc[0]["State"]["Running"] == true);
  CHECK(d(s, {"info"}).out.find("Containers: 2\n Running: 1\n") != std::string::npos);
  CHECK(d(s, {"stats", "--no-stream"}).out.find("web") != std::string::npos);
}

TEST_CASE("state serialization round-trips") {
  auto s = default_seed();
  d(s, {"run", "--name", "x", "alpine"});
  CHECK(from_json_text(to_json_text(s)) == s);
  CHECK_THROWS(from_json_text("{"));
  CHECK_THROWS(from_json_text("{\"containers\":[{\"id\":1}]}"));
}

TEST_CASE("dispatch is deterministic") {
  std::vector<std::vector<std::string>> script = {
      {"run", "alpine"}, {"start", "db"}, {"stop", "web"}, {"pull", "busybox"}, {"rm", "web"}};
  auto a = default_seed();
  auto b = default_seed();
  for (const auto& cmd : script) {
    auto ra = dispatch(a, cmd);
    auto rb = dispatch(b, cmd);
    CHECK(ra.out == rb.out);
    CHECK(ra.exit_code == rb.exit_code);
  }
  CHECK(a == b);
}

TEST_CASE("model-based: lifecycle commands follow the reference state machine") {
  enum class S { running, exited };
  std::mt19937 rng(1234);
  const std::vector<std::string> ops = {"start", "stop", "restart", "rm"};
  for (int round = 0; round < 50; ++round) {
    auto state = default_seed();
    std::map<std::string, S> model = {{"web", S::running}, {"db", S::exited}};
    for (int step = 0; step < 60; ++step) {
      std::vector<std::string> names = {"web", "db", "ghost", "extra"};
      auto op = ops[std::uniform_int_distribution<std::size_t>(0, ops.size() - 1)(rng)];
      auto name = names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)];
      if (name == "extra" && !model.contains("extra") && step % 3 == 0) {
        REQUIRE(dispatch(state, {"run", "--name", "extra", "alpine"}).exit_code == 0);
        model["extra"] = S::running;
        continue;
      }
      auto r = dispatch(state, {op, name});
      int expected_exit = 0;
      auto it = model.find(name);
      if (it == model.end()) {
        expected_exit = 1;
      } else if (op == "start" || op == "restart") {
        it->second = S::running;
      } else if (op == "stop") {
        it->second = S::exited;
      } else if (it->second == S::running) {
        expected_exit = 1;
      } else {
        model.erase(it);
      }
      CHECK(r.exit_code == expected_exit);
      auto listed = dockhand::core::parse_containers(dispatch(state, {"ps", "-a", "--format", kContainersFormat}).out);
      REQUIRE(listed.size() == model.size());
      for (const auto& c : listed) {
        REQUIRE(model.contains(c.name));
        CHECK((c.state == dockhand::core::ContainerState::running) == (model[c.name] == S::running));
      }
    }
  }
}

TEST_CASE("seeded states list exactly their containers") {
  TempDir dir;
  auto path = dir / "state.json";
  MockState five;
  five.containers.clear();
  for (int i = 0; i < 5; ++i)
    five.containers.push_back({"id" + std::to_string(i), "n" + std::to_string(i), "img", MockContainerState::created, {}});
  seed_state(path, five);
  CHECK(run(path, {"ps", "-a", "--format", "{{.Names}}"}).out == "n0\nn1\nn2\nn3\nn4\n");
  MockState empty;
  empty.containers.clear();
  seed_state(path, empty);
  CHECK(run(path, {"ps", "--format", "{{.Names}}"}).out.empty());
  seed_state(path, default_seed());
  CHECK(run(path, {"start", "db"}).exit_code == 0);
  CHECK(run(path, {"ps", "-a", "--filter", "name=db", "--format", "{{.Status}}"}).out == "Up (mock)\n");
}

TEST_CASE("run() persists changes and strips --sleep-ms") {
  TempDir dir;
  auto path = dir / "state.json";
  auto r = run(path, {"ps", "-a", "--format", "{{.Names}}"});
  CHECK(r.out == "web\ndb\n");
  CHECK(std::filesystem::exists(path));
  CHECK(run(path, {"start", "--sleep-ms", "10", "db"}).exit_code == 0);
  CHECK(load_state(path).containers[1].state == MockContainerState::running);
  auto seeded = default_seed();
  seeded.containers.clear();
  seed_state(path, seeded);
  CHECK(run(path, {"ps", "-a", "--format", "{{.Names}}"}).out.empty());
  dockhand::testing::write_text(path, "not json");
  CHECK(run(path, {"ps"}).exit_code == 1);
}
