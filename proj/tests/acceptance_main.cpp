// Acceptance suite: one criterion per invocation (argv[1] in 1..7), printing
// a PASS/FAIL line per criterion and exiting nonzero on failure.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include "chainscope/report.hpp"
#include "chainscope/zoo.hpp"
#include "oracles.hpp"

namespace cs = chainscope;

namespace {

int failures = 0;
std::string current;

#define EXPECT(cond, msg)                                              \
  do {                                                                 \
    if (!(cond)) {                                                     \
      std::printf("  [x] %s: %s\n", current.c_str(), msg);             \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int criterion_stub(int n) {
  std::printf("criterion %d: not yet implemented\n", n);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance_tests <criterion 1..7>\n");
    return 2;
  }
  int which = std::atoi(argv[1]);
  current = "criterion " + std::to_string(which);
  auto t0 = std::chrono::steady_clock::now();
  int rc = criterion_stub(which);
  std::printf("%s %s (%.2fs)\n", rc == 0 ? "[PASS]" : "[FAIL]",
              current.c_str(), seconds_since(t0));
  return rc;
}
