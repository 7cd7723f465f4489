#include <doctest.h>

#include "dockhand/transport/process.hpp"

using namespace dockhand::transport;
using namespace std::chrono_literals;

TEST_CASE("arguments reach the child verbatim, without a shell") {
  auto out = run_process({{"/bin/echo", "$HOME", ";", "`id`", "a b"}, {}, 5s});
  CHECK(out.exit_code == 0);
  CHECK(out.out == "$HOME ; `id` a b\n");
  CHECK_FALSE(out.timed_out);
}

TEST_CASE("exit codes and stderr are captured") {
  auto out = run_process({{"/bin/sh", "-c", "echo oops >&2; exit 7"}, {}, 5s});
  CHECK(out.exit_code == 7);
  CHECK(out.err == "oops\n");
  CHECK(out.out.empty());
}

TEST_CASE("environment overrides are applied") {
  auto out = run_process({{"/bin/sh", "-c", "printf %s \"$DOCKHAND_PROBE\""}, {{"DOCKHAND_PROBE", "v1"}}, 5s});
  CHECK(out.out == "v1");
}

TEST_CASE("missing executables fail to spawn") {
  auto out = run_process({{"/nonexistent/binary"}, {}, 5s});
  CHECK(out.spawn_failed);
  CHECK(out.exit_code == 127);
}

TEST_CASE("timeouts kill the whole process group") {
  auto started = std::chrono::steady_clock::now();
  auto out = run_process({{"/bin/sh", "-c", "sleep 30 & sleep 30; echo never"}, {}, 300ms});
  auto elapsed = std::chrono::steady_clock::now() - started;
  CHECK(out.timed_out);
  CHECK(out.out.empty());
  CHECK(elapsed < 5s);
}

TEST_CASE("output beyond the cap is truncated with a marker") {
  ProcessOptions opts{{"/bin/sh", "-c", "head -c 100000 /dev/zero | tr '\\0' x"}, {}, 10s, 1000};
  auto out = run_process(opts);
  CHECK(out.exit_code == 0);
  CHECK(out.out.starts_with(std::string(1000, 'x')));
  CHECK(out.out.substr(1000) == "\n[output truncated at 1000 bytes]\n");
}
