// brwlab: runs one experiment from a YAML config and writes its data,
// summary and manifest under the output directory.
//
//   brwlab omega --config f2.yaml --out runs/f2 --threads 4
//   brwlab check --check

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "brwlab/errors.hpp"
#include "brwlab/experiment.hpp"

using namespace brwlab;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool check = false;
  std::vector<int> only;
};

ExperimentConfig load(const Flags& f, ExperimentKind kind) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    std::ifstream is(f.config);
    if (!is) throw ValidationError("cannot read config " + f.config);
    std::stringstream ss;
    ss << is.rdbuf();
    c = parse_config(ss.str());
  }
  c.kind = kind;
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.out = *f.out;
  if (f.threads) c.threads = *f.threads;
  return c;
}

int run(const Flags& f, ExperimentKind kind) {
  try {
    const auto c = load(f, kind);
    const auto m = run_experiment(c, {.check = f.check, .only = f.only});
    std::printf("%s: %zu files in %s (config %s, %.1fs)\n", m.experiment.c_str(), m.outputs.size(), c.out.c_str(),
                m.config_hash.substr(0, 12).c_str(), m.wall_seconds);
    for (const auto& [name, ok] : m.checks.items()) std::printf("  %s %s\n", ok.get<bool>() ? "PASS" : "FAIL", name.c_str());
    for (const auto& cap : m.caps_hit) std::printf("  cap hit: %s\n", cap.c_str());
    return m.exit_code();
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitValidation;
  } catch (const DivergentSeries& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitValidation;
  } catch (const UnsupportedSpec& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitValidation;
  } catch (const CapExceeded& e) {
    std::fprintf(stderr, "cap exceeded: %s\n", e.what());
    return kExitCapTruncation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"brwlab: random walks, branching random walks and boundary dimension on groups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", BRWLAB_VERSION);
  Flags flags;
  int status = kExitOk;

  const std::vector<std::pair<ExperimentKind, std::string>> kinds{
      {ExperimentKind::Green, "Green function values with certified tails"},
      {ExperimentKind::Omega, "growth rate of Green sphere sums on an r grid"},
      {ExperimentKind::Brw, "branching random walk traces"},
      {ExperimentKind::Hdim, "dimension sandwich of the BRW limit set"},
      {ExperimentKind::Floyd, "Floyd and visual distances, shadows"},
      {ExperimentKind::Freeprod, "return weights and landscapes on free products"},
      {ExperimentKind::Gap, "parabolic gap per free factor"},
      {ExperimentKind::Check, "the acceptance suite"}};
  for (const auto& [kind, help] : kinds) {
    auto* sub = app.add_subcommand(to_string(kind), help);
    sub->add_option("--config", flags.config, "YAML experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "override the config seed");
    sub->add_option("--out", flags.out, "override the output directory");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--check", flags.check, "exit 4 when a check fails");
    if (kind == ExperimentKind::Check) sub->add_option("--only", flags.only, "criteria subset (1..12)");
    sub->callback([&flags, &status, kind = kind] { status = run(flags, kind); });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }
  return status;
}
