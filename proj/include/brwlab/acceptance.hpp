#pragma once

// The acceptance suite: desk-scale oracles and statistical checks, one
// record per criterion.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace brwlab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;          // numerical verdict at the stated tolerance
  double seconds = 0.0;
  double time_limit = 0.0;    // seconds
  nlohmann::json values;      // measured quantities behind the verdict
  bool within_time() const { return seconds < time_limit; }
};

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<int> only;      // empty: criteria 1..12
};

/// Criteria 1..12. The determinism criterion compares two suite runs and is
/// left to the caller.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);

/// Verdicts and values without timings, so equal seeds give equal text.
nlohmann::json acceptance_summary(const std::vector<CriterionResult>& results, std::uint64_t seed);

/// `AC<id> PASS|FAIL <title> (<seconds>s)`; a FAIL also names a missed time limit.
std::string format_result_line(const CriterionResult& r);

}  // namespace brwlab
