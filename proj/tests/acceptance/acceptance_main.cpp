// Runs criteria 1..12, then repeats the suite with the same seed for the
// determinism criterion, printing one line per criterion.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>

#include "brwlab/acceptance.hpp"

using namespace brwlab;

int main(int argc, char** argv) {
  CLI::App app{"brwlab acceptance suite"};
  std::uint64_t seed = 20240611;
  int threads = 4;
  bool skip_determinism = false;
  std::vector<int> only;
  app.add_option("--seed", seed, "suite seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "run only these criteria (1..12)");
  app.add_flag("--skip-determinism", skip_determinism, "do not repeat the suite");
  CLI11_PARSE(app, argc, argv);

  const AcceptanceOptions opt{.seed = seed, .threads = threads, .only = only};
  std::vector<CriterionResult> results;
  int failed = 0;
  {
    auto t0 = std::chrono::steady_clock::now();
    results = run_acceptance(opt);
    for (const auto& r : results) {
      std::printf("%s\n", format_result_line(r).c_str());
      std::printf("     %s\n", r.values.dump().c_str());
      if (!(r.pass && r.within_time())) ++failed;
    }
    std::printf("suite time %.1fs\n", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  if (!skip_determinism) {
    const auto first = acceptance_summary(results, seed).dump(2);
    const auto t0 = std::chrono::steady_clock::now();
    const auto second = acceptance_summary(run_acceptance(opt), seed).dump(2);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool same = first == second;
    std::printf("AC13 %s  identical summary JSON on a repeated run (%.1fs)\n", same ? "PASS" : "FAIL", secs);
    if (!same) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
