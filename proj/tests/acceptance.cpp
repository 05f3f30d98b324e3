// Acceptance runner: one line per criterion with the pinned tolerances.
#include <cstdio>
#include <cstring>

#include "anyonforge/acceptance.hpp"

int main(int argc, char **argv) {
  anyonforge::AcceptanceConfig cfg;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      cfg.quick = true;
    } else {
      std::fprintf(stderr, "usage: %s [--quick]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0;
  anyonforge::run_acceptance(cfg, [&](const anyonforge::CriterionResult &r) {
    std::printf("criterion %2d: %s  %-34s residual=%.3e tol=%.1e  %s\n", r.id, r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.residual, r.tolerance, r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass)
      ++failed;
  });
  std::printf("%s: %d of 10 criteria failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
