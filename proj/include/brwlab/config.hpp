#pragma once

// Experiment configuration: YAML text with nested sections, validated before
// any computation and identified by the SHA-256 of its rendering.

#include <cstdint>
#include <string>
#include <vector>

#include "brwlab/brw.hpp"
#include "brwlab/groups.hpp"
#include "brwlab/measure.hpp"

namespace brwlab {

/// Parses labels such as "F2", "Z3", "Z", "Z/5" and products "F2*Z3".
GroupSpec parse_group_spec(const std::string& text);

enum class ExperimentKind { Green, Omega, Brw, Hdim, Floyd, Freeprod, Gap, Check };
std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

struct MeasureConfig {
  std::string kind = "simple";  // simple | adapted
  double laziness = 0.0;        // simple
  double alpha = 0.5;           // adapted: weight of factor 1
  bool operator==(const MeasureConfig&) const = default;
};

struct OffspringConfig {
  std::string kind = "geometric";  // geometric | fixed | table
  double mean = 1.1;
  int max_children = 64;
  int k = 1;
  std::vector<double> p;
  bool operator==(const OffspringConfig&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Omega;
  std::string group = "F2";
  MeasureConfig mu;
  OffspringConfig nu;

  int n_max = 14;
  int N = 60;                          // convolution horizon for green
  int T = 40;                          // BRW generations
  std::uint64_t K = 2'000'000;         // BRW population cap
  int replicas = 20;
  double lambda = 0.5;
  int eta = 0;
  int L = 0;
  int lo = 8;                          // fit window
  int hi = 14;
  double C = 10.0;
  double covering_alpha = 0.0;
  int chain_radius = -1;
  int shadow_K = 2;
  std::vector<std::string> r_grid{"1"};  // numbers, "R" or "R*f" (fraction of R-hat)
  std::vector<double> h_grid;
  std::vector<double> alpha_grid;
  std::vector<std::string> elements;     // words in the group, "e" for the identity

  std::uint64_t seed = 1;
  std::string out = "out";
  int threads = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ValidationError on any bad knob.
void validate(const ExperimentConfig& c);
ExperimentConfig parse_config(const std::string& yaml_text);
std::string render_config(const ExperimentConfig& c);
/// Hex SHA-256 of the rendered config.
std::string config_hash(const ExperimentConfig& c);

StepDistribution make_measure(const Group& g, const MeasureConfig& m);
OffspringDistribution make_offspring(const OffspringConfig& o);

/// Resolves one r-grid entry against R-hat.
double resolve_r(const std::string& entry, double R_hat);
bool needs_r_hat(const std::vector<std::string>& grid);

/// Seed of a named sub-task stream.
std::uint64_t task_seed(std::uint64_t seed, const std::string& task);

}  // namespace brwlab
