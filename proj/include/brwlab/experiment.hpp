#pragma once

// Config-driven experiment runs: one pipeline per experiment kind, CSV data
// and a JSON summary in the output directory, plus a manifest with the
// config hash and wall time.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brwlab/config.hpp"

namespace brwlab {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitValidation = 2, kExitCapTruncation = 3, kExitCheckFailure = 4 };

struct RunOptions {
  bool check = false;    // failed checks turn into kExitCheckFailure
  std::vector<int> only; // check experiment: criteria subset
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::string experiment;
  double wall_seconds = 0.0;
  std::vector<std::string> caps_hit;
  std::vector<std::string> outputs;  // file names relative to the output directory
  nlohmann::json summary;            // deterministic: equal configs give equal text
  nlohmann::json checks;             // name -> bool
  bool check_requested = false;

  bool checks_passed() const;
  /// Cap truncation wins over check failures, since the data is incomplete.
  int exit_code() const;
  nlohmann::json to_json() const;
};

/// Validates, runs and writes config.yaml, the data files, summary.json and
/// manifest.json under config.out. ValidationError escapes before any output.
RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& opt = {});

/// Elements named in the config, or the defaults for the experiment.
std::vector<Element> config_elements(const Group& g, const ExperimentConfig& config);

}  // namespace brwlab
