#include <doctest.h>

#include <map>
#include <random>
#include <thread>

#include <json.hpp>

#include "dockhand/core/registry.hpp"
#include "support/temp_dir.hpp"

using namespace dockhand::core;
using dockhand::testing::TempDir;

namespace {

RegistryError::Code error_code_of(auto&& fn) {
  try {
    fn();
  } catch (const RegistryError& e) {
    return e.code();
  }
  FAIL("expected RegistryError");
  return RegistryError::Code::io_error;
}

}  // namespace

TEST_CASE("add assigns fresh ids and defaults") {
  RegistryStore store;
  auto a = store.add("edge-1", "192.168.10.23", 22, TransportKind::ssh);
  auto b = store.add("edge-1", "192.168.10.23", 22, TransportKind::ssh);
  CHECK(a.id != b.id);
  CHECK(DeviceId::is_well_formed(a.id.str()));
  CHECK(a.last_status == DeviceStatus::unknown);
  CHECK(a.port == 22);
  CHECK(store.size() == 2);
  CHECK(store.get(a.id) == a);
}

TEST_CASE("add validates its input") {
  RegistryStore store;
  CHECK(error_code_of([&] { store.add("x", "", 22, TransportKind::ssh); }) == RegistryError::Code::invalid_address);
  CHECK(error_code_of([&] { store.add("x", "-oProxyCommand=id", 22, TransportKind::ssh); }) ==
        RegistryError::Code::invalid_address);
  CHECK(error_code_of([&] { store.add("x", "host name", 22, TransportKind::ssh); }) ==
        RegistryError::Code::invalid_address);
  CHECK(error_code_of([&] { store.add("x", "h", 0, TransportKind::ssh); }) == RegistryError::Code::invalid_port);
  CHECK(error_code_of([&] { store.add("x", "h", 65536, TransportKind::ssh); }) == RegistryError::Code::invalid_port);
  CHECK(error_code_of([&] { store.add("x", "h", 1, TransportKind::local); }) ==
        RegistryError::Code::invalid_transport);
  CHECK(store.size() == 0);

  RegistryStore dev(true);
  CHECK_NOTHROW(dev.add("x", "localhost", 1, TransportKind::local));
  CHECK_NOTHROW(dev.add("x", "::1", 65535, TransportKind::http_agent));
}

TEST_CASE("missing ids are not_found") {
  RegistryStore store;
  DeviceId ghost{"0123456789abcdef0123456789abcdef"};
  CHECK(error_code_of([&] { store.get(ghost); }) == RegistryError::Code::not_found);
  CHECK(error_code_of([&] { store.remove(ghost); }) == RegistryError::Code::not_found);
  CHECK(error_code_of([&] { store.set_status(ghost, DeviceStatus::reachable); }) == RegistryError::Code::not_found);
}

TEST_CASE("list is ordered by creation") {
  RegistryStore store;
  std::vector<DeviceId> ids;
  for (int i = 0; i < 20; ++i) ids.push_back(store.add("d", "h", 22, TransportKind::ssh).id);
  auto listed = store.list();
  REQUIRE(listed.size() == 20);
  for (std::size_t i = 1; i < listed.size(); ++i) {
    bool ordered = listed[i - 1].created_at < listed[i].created_at ||
                   (listed[i - 1].created_at == listed[i].created_at && listed[i - 1].id < listed[i].id);
    CHECK(ordered);
  }
}

TEST_CASE("model-based: random operation sequences agree with a map oracle") {
  std::mt19937 rng(4242);
  for (int round = 0; round < 20; ++round) {
    RegistryStore store;
    std::map<std::string, DeviceRecord> model;
    std::uniform_int_distribution<int> op(0, 9);
    for (int step = 0; step < 200; ++step) {
      int o = op(rng);
      if (o < 5 || model.empty()) {
        auto rec = store.add("n" + std::to_string(step), "host" + std::to_string(step % 7), 1 + step, TransportKind::ssh);
        CHECK_FALSE(model.contains(rec.id.str()));
        model[rec.id.str()] = rec;
      } else {
        auto it = model.begin();
        std::advance(it, std::uniform_int_distribution<std::size_t>(0, model.size() - 1)(rng));
        DeviceId id{it->first};
        if (o < 8) {
          CHECK(store.remove(id) == it->second);
          model.erase(it);
        } else {
          store.set_status(id, DeviceStatus::reachable);
          it->second.last_status = DeviceStatus::reachable;
        }
      }
      REQUIRE(store.size() == model.size());
    }
    for (const auto& rec : store.list()) CHECK(model.at(rec.id.str()) == rec);
  }
}

TEST_CASE("save and load round-trip") {
  TempDir dir;
  auto path = dir / "devices.json";
  RegistryStore store(true);
  store.add("a", "192.168.10.23", 22, TransportKind::ssh);
  auto b = store.add("b", "edge.local", 9090, TransportKind::http_agent);
  store.add("c", "localhost", 1, TransportKind::local);
  store.set_status(b.id, DeviceStatus::unreachable);
  store.save(path);

  auto loaded = RegistryStore::load(path, true);
  CHECK(loaded == store);

  auto doc = nlohmann::json::parse(dockhand::testing::read_text(path));
  CHECK(doc.at("version") == 1);
  CHECK(doc.at("devices").size() == 3);
  CHECK(doc.dump().find("password") == std::string::npos);
}

TEST_CASE("round-trip of 1000 devices") {
  TempDir dir;
  auto path = dir / "devices.json";
  RegistryStore store;
  for (int i = 0; i < 1000; ++i)
    store.add("device-" + std::to_string(i), "10.0." + std::to_string(i / 256) + "." + std::to_string(i % 256),
              1 + i, i % 2 ? TransportKind::ssh : TransportKind::http_agent);
  store.save(path);
  auto loaded = RegistryStore::load(path);
  CHECK(loaded.size() == 1000);
  CHECK(loaded == store);
}

TEST_CASE("corrupt stores are reported, not silently emptied") {
  TempDir dir;
  auto path = dir / "devices.json";
  auto load_code = [&](const std::string& text) {
    dockhand::testing::write_text(path, text);
    return error_code_of([&] { RegistryStore::load(path); });
  };
  CHECK(load_code("") == RegistryError::Code::corrupt_store);
  CHECK(load_code("{\"version\":1,\"devices\":[") == RegistryError::Code::corrupt_store);
  CHECK(load_code("[]") == RegistryError::Code::corrupt_store);
  CHECK(load_code("{\"version\":2,\"devices\":[]}") == RegistryError::Code::corrupt_store);
  CHECK(load_code("{\"version\":1,\"devices\":[{\"id\":\"x\"}]}") == RegistryError::Code::corrupt_store);
  CHECK(error_code_of([&] { RegistryStore::load(dir / "absent.json"); }) == RegistryError::Code::io_error);

  dockhand::testing::write_text(path, "{\"version\":1,\"devices\":[]}");
  CHECK(RegistryStore::load(path).size() == 0);
}

TEST_CASE("concurrent writers and readers") {
  RegistryStore store;
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < 100; ++i) {
        auto rec = store.add("c", "h", 22, TransportKind::ssh);
        (void)store.list();
        if (i % 2) store.remove(rec.id);
      }
    });
  for (auto& th : threads) th.join();
  CHECK(store.size() == 400);
}

TEST_CASE("atomic write leaves no temp files") {
  TempDir dir;
  auto path = dir / "f.json";
  write_file_atomic(path, "one");
  write_file_atomic(path, "two");
  CHECK(dockhand::testing::read_text(path) == "two");
  int entries = 0;
  for ([[maybe_unused]] auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
  CHECK(entries == 1);
}
