// Stand-in engine CLI backed by a JSON state file (MOCKDOCKER_STATE).
#include <cstdlib>
#include <iostream>

#include "dockhand/mock/engine.hpp"

int main(int argc, char** argv) {
  const char* state = std::getenv(dockhand::mock::kStateEnv);
  if (!state || !*state) {
    std::cerr << "mock-docker: " << dockhand::mock::kStateEnv << " is not set\n";
    return 1;
  }
  std::vector<std::string> args(argv + 1, argv + argc);
  auto result = dockhand::mock::run(state, std::move(args));
  std::cout << result.out << std::flush;
  std::cerr << result.err << std::flush;
  return result.exit_code;
}
