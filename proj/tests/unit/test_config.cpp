#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "brwlab/config.hpp"
#include "brwlab/errors.hpp"
#include "brwlab/experiment.hpp"

using namespace brwlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("brwlab_test_" + name);
  fs::remove_all(p);
  return p;
}

int csv_rows(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  int n = -1;
  while (std::getline(is, line)) ++n;
  return n;
}

}  // namespace

TEST(Config, GroupLabels) {
  EXPECT_EQ(parse_group_spec("F2"), GroupSpec::free_group(2));
  EXPECT_EQ(parse_group_spec("Z3"), GroupSpec::free_abelian(3));
  EXPECT_EQ(parse_group_spec("Z"), GroupSpec::free_abelian(1));
  EXPECT_EQ(parse_group_spec("Z/5"), GroupSpec::cyclic(5));
  EXPECT_EQ(parse_group_spec("F2*Z3"),
            GroupSpec::free_product({GroupSpec::free_group(2), GroupSpec::free_abelian(3)}));
  EXPECT_THROW(parse_group_spec("Q8"), ValidationError);
  EXPECT_THROW(parse_group_spec("F0"), ValidationError);
}

TEST(Config, DefaultRoundTrip) {
  ExperimentConfig c;
  EXPECT_EQ(parse_config(render_config(c)), c);
}

TEST(Config, RandomRoundTrips) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<ExperimentKind> kinds{ExperimentKind::Green, ExperimentKind::Omega,    ExperimentKind::Brw,
                                          ExperimentKind::Hdim,  ExperimentKind::Floyd,    ExperimentKind::Gap,
                                          ExperimentKind::Freeprod};
  for (int it = 0; it < 50; ++it) {
    ExperimentConfig c;
    c.group = it % 2 ? "F2*Z3" : "F3";
    c.kind = kinds[rng() % (it % 2 ? kinds.size() : 5)];
    if (it % 2) {
      c.mu.kind = "adapted";
      c.mu.alpha = 0.01 + 0.98 * u(rng);
    } else {
      c.mu.laziness = 0.9 * u(rng);
    }
    c.nu.mean = 1.0 + u(rng);
    c.n_max = 2 + static_cast<int>(rng() % 20);
    c.T = 20 + static_cast<int>(rng() % 100);
    c.K = 1 + rng() % 1000000;
    c.lambda = 0.01 + 0.98 * u(rng);
    c.lo = 2 + static_cast<int>(rng() % 5);
    c.hi = c.lo + 1 + static_cast<int>(rng() % 5);
    c.C = 1.0 + 10.0 * u(rng);
    c.r_grid = {"1", "R", "R*" + std::to_string(u(rng)), std::to_string(1.0 + u(rng))};
    c.h_grid = {u(rng), u(rng) * 1e-7};
    c.alpha_grid = {0.1, 0.5};
    c.elements = {"e", "a b A"};
    c.seed = rng();
    c.out = "runs/x" + std::to_string(it);
    const auto text = render_config(c);
    const auto back = parse_config(text);
    ASSERT_EQ(back, c) << text;
    EXPECT_EQ(render_config(back), text);
  }
}

TEST(Config, ValidationRejectsBadKnobs) {
  EXPECT_THROW(parse_config("lambda: 1.5\n"), ValidationError);
  EXPECT_THROW(parse_config("experiment: spectral\n"), ValidationError);
  EXPECT_THROW(parse_config("no_such_knob: 3\n"), ValidationError);
  EXPECT_THROW(parse_config("mu: {kind: adapted}\n"), ValidationError);  // F2 is not a product
  EXPECT_THROW(parse_config("r_grid: [\"Rx\"]\n"), ValidationError);
  EXPECT_THROW(parse_config("elements: [\"a q\"]\n"), ValidationError);
  EXPECT_THROW(parse_config("window: {lo: 8, hi: 8}\n"), ValidationError);
  EXPECT_THROW(parse_config("nu: {kind: table, p: [0.5, 0.5]}\n"), ValidationError);
  EXPECT_THROW(parse_config("[1, 2]\n"), ValidationError);
  EXPECT_THROW(parse_config("experiment: gap\n"), ValidationError);
  EXPECT_THROW(parse_config("experiment: freeprod\ngroup: F2*Z3\n"), ValidationError);
  EXPECT_THROW(parse_config("experiment: freeprod\ngroup: F2*Z3\nmu: {kind: adapted}\nalpha_grid: [0.1]\n"),
               ValidationError);
  EXPECT_NO_THROW(parse_config("group: F2*Z3\nmu: {kind: adapted, alpha: 0.1}\n"));
}

TEST(Config, HashIdentifiesTheRendering) {
  ExperimentConfig a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
  b.lambda = 0.5000000000000001;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, RGridAndSeeds) {
  EXPECT_DOUBLE_EQ(resolve_r("R", 1.2), 1.2);
  EXPECT_DOUBLE_EQ(resolve_r("R*0.5", 1.2), 0.6);
  EXPECT_DOUBLE_EQ(resolve_r("1.05", 1.2), 1.05);
  EXPECT_TRUE(needs_r_hat({"1", "R*0.9"}));
  EXPECT_FALSE(needs_r_hat({"1", "1.1"}));
  EXPECT_NE(task_seed(1, "a"), task_seed(1, "b"));
  EXPECT_NE(task_seed(1, "a"), task_seed(2, "a"));
  EXPECT_EQ(task_seed(7, "hdim/main"), task_seed(7, "hdim/main"));
}

TEST(Experiment, OmegaOnF2WritesOneRowPerR) {
  const auto dir = scratch("omega");
  ExperimentConfig c;
  c.kind = ExperimentKind::Omega;
  c.r_grid = {"1", "1.05", "R"};
  c.out = dir.string();
  const auto m = run_experiment(c, {.check = true});
  EXPECT_EQ(m.exit_code(), kExitOk);
  EXPECT_EQ(csv_rows(dir / "omega.csv"), 3);
  for (const auto& f : m.outputs) EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto rows = m.summary["rows"];
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0]["omega_hat"].get<double>(), 0.0, 0.02);
  EXPECT_NEAR(rows[2]["omega_hat"].get<double>(), 0.5 * std::log(3.0), 0.03);
  EXPECT_EQ(parse_config(slurp(dir / "config.yaml")), c);
}

TEST(Experiment, SameSeedSameSummaryBytes) {
  ExperimentConfig c;
  c.kind = ExperimentKind::Brw;
  c.T = 25;
  c.replicas = 4;
  c.threads = 3;
  c.lo = 4;
  c.hi = 8;
  c.elements = {"e", "a"};
  c.seed = 99;
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  c.out = d1.string();
  run_experiment(c);
  c.out = d2.string();
  c.threads = 1;
  run_experiment(c);
  // out and threads enter the config hash, so compare everything else
  auto strip = [](std::string s) {
    auto j = nlohmann::json::parse(s);
    j.erase("config_hash");
    return j.dump();
  };
  EXPECT_EQ(strip(slurp(d1 / "summary.json")), strip(slurp(d2 / "summary.json")));
  EXPECT_EQ(slurp(d1 / "trace.csv"), slurp(d2 / "trace.csv"));
  const auto first = slurp(d2 / "summary.json");
  run_experiment(c);
  EXPECT_EQ(slurp(d2 / "summary.json"), first);
}

TEST(Experiment, CapTruncationExitCode) {
  const auto dir = scratch("cap");
  ExperimentConfig c;
  c.kind = ExperimentKind::Brw;
  c.nu.kind = "fixed";
  c.nu.k = 2;
  c.T = 30;
  c.K = 100;
  c.replicas = 2;
  c.out = dir.string();
  const auto m = run_experiment(c);
  EXPECT_FALSE(m.caps_hit.empty());
  EXPECT_EQ(m.exit_code(), kExitCapTruncation);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(Experiment, ValidationHappensBeforeAnyOutput) {
  const auto dir = scratch("invalid");
  ExperimentConfig c;
  c.lambda = 2.0;
  c.out = dir.string();
  EXPECT_THROW(run_experiment(c), ValidationError);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Experiment, FailedChecksOnlyCountWhenRequested) {
  RunManifest m;
  m.checks = {{"a", true}, {"b", false}};
  EXPECT_EQ(m.exit_code(), kExitOk);
  m.check_requested = true;
  EXPECT_EQ(m.exit_code(), kExitCheckFailure);
  m.caps_hit.push_back("K");
  EXPECT_EQ(m.exit_code(), kExitCapTruncation);
}

TEST(Experiment, WritesOnlyInsideTheOutputDirectory) {
  const auto parent = scratch("confined");
  fs::create_directories(parent);
  ExperimentConfig c;
  c.kind = ExperimentKind::Floyd;
  c.elements = {"a", "a b", "B"};
  c.shadow_K = 1;
  c.out = (parent / "run").string();
  const auto m = run_experiment(c);
  std::vector<std::string> top;
  for (const auto& e : fs::directory_iterator(parent)) top.push_back(e.path().filename().string());
  EXPECT_EQ(top, std::vector<std::string>{"run"});
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(parent / "run")) files += e.is_regular_file();
  EXPECT_EQ(files, m.outputs.size());
}
