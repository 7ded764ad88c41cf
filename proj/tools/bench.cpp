#include "bench.hpp"

#include <cstdio>

#ifndef NPBRAKE_NO_BENCH
#include "criteria.hpp"
#endif

namespace npbrake_cli {

#ifdef NPBRAKE_NO_BENCH
int RunBench(const std::string&) {
  std::fprintf(stderr, "bench is not available in this build (configure with tests on)\n");
  return 1;
}
#else
int RunBench(const std::string& data_dir) {
  const auto results = npb::acceptance::RunAll(data_dir);
  std::printf("%-4s %-6s %-9s %s\n", "id", "result", "seconds", "criterion");
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-4d %-6s %-9.2f %s: %s\n", r.id, r.pass ? "PASS" : "FAIL", r.seconds,
                r.name.c_str(), r.detail.c_str());
    ok = ok && r.pass;
  }
  return ok ? 0 : 4;
}
#endif

}  // namespace npbrake_cli
