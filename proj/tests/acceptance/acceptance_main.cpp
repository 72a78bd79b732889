// Acceptance gate: runs every verification criterion at the configured
// preset and prints one pass/fail line per criterion. Exit code is nonzero
// when any criterion fails.
//
// Environment:
//   KINCHAIN_PRESET=quick|paper   (default quick)
//   KINCHAIN_SEED=<n>             (default 20240901)
//   KINCHAIN_OUT=<dir>            (default build tree ./acceptance_out)
//   KINCHAIN_THREADS=<n>

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "kinchain/harness.hpp"

int main() {
  using namespace kinchain::harness;
  const char* preset = std::getenv("KINCHAIN_PRESET");
  const char* seed_env = std::getenv("KINCHAIN_SEED");
  const char* out_env = std::getenv("KINCHAIN_OUT");
  const char* thr_env = std::getenv("KINCHAIN_THREADS");

  Config cfg = Config::from_string("");
  cfg.set("run", "kind", "verify-all");
  cfg.set("run", "preset", preset ? preset : "quick");
  cfg.set("run", "seed", seed_env ? seed_env : "20240901");
  cfg.set("run", "out", out_env ? out_env : "acceptance_out");
  if (thr_env) cfg.set("run", "threads", thr_env);

  try {
    RunConfig rc = parse_run_config(cfg, "", "", 0, false, "");
    RunRecord rec = run(rc);
    std::size_t fails = 0, unid = 0;
    for (const auto& c : rec.checks) {
      const char* tag = c.status == "pass" ? "[PASS]"
                        : c.status == "fail" ? "[FAIL]"
                                             : "[UNID]";
      std::printf("%s %-4s %-11s %s (measured %.6g, tolerance %.6g)\n", tag,
                  c.id.c_str(), c.theorem.c_str(), c.description.c_str(),
                  c.measured, c.tolerance);
      if (!c.details.empty()) std::printf("        %s\n", c.details.c_str());
      if (c.status == "fail") ++fails;
      if (c.status == "unidentifiable") ++unid;
    }
    std::printf("\nacceptance: %zu checks, %zu failed, %zu unidentifiable, "
                "%.1f s wall\n",
                rec.checks.size(), fails, unid, rec.wall_seconds);
    return fails == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: error: " << e.what() << "\n";
    return 2;
  }
}
