#include <gtest/gtest.h>

#include <cmath>

#include "brwlab/dimension.hpp"

using namespace brwlab;

namespace {

Group f2() { return Group(GroupSpec::free_group(2)); }

std::vector<Trace> batch(const Group& g, double mean, int T, int replicas, std::uint64_t seed) {
  BrwConfig c{.mu = StepDistribution::simple(g)};
  c.nu = OffspringDistribution::geometric(mean);
  c.T = T;
  c.replicas = replicas;
  c.threads = 4;
  c.seed = seed;
  return BrwSimulator(g, c).run_replicas();
}

}  // namespace

TEST(BoxCounting, FullFreeGroupBoundary) {
  Group g = f2();
  auto b = box_counting_dim(g, g.sphere(8), 0.5, {2, 3, 4, 5, 6, 7});
  EXPECT_NEAR(b.dimension, std::log(3.0) / std::log(2.0), 1e-9);
  EXPECT_EQ(b.counts[0], 12u);
  // squaring lambda with the scales halved keeps the cylinders
  auto sq = box_counting_dim(g, g.sphere(8), 0.25, {1, 2, 3, 4});
  EXPECT_NEAR(sq.dimension, b.dimension / 2.0, 0.05);
}

TEST(BoxCounting, SingleRayAndBadScales) {
  Group g = f2();
  auto b = box_counting_dim(g, {g.parse("a a a a a a")}, 0.5, {1, 2, 3, 4});
  EXPECT_TRUE(b.degenerate);
  EXPECT_EQ(b.dimension, 0.0);
  EXPECT_THROW(box_counting_dim(g, g.sphere(4), 0.5, {1, 2, 3}), ValidationError);
  EXPECT_THROW(box_counting_dim(g, g.sphere(4), 0.5, {1, 2, 3, 4}), ValidationError);
}

TEST(Covering, ThresholdOfAnExponentialSequence) {
  std::vector<double> M;
  for (int n = 0; n <= 20; ++n) M.push_back(std::exp(0.4 * n));
  const double h = covering_threshold(M, 0.5, 8, 16);
  EXPECT_NEAR(h, 0.4 / std::log(2.0), 0.1);
  EXPECT_TRUE(covering_sum(M, 0.5, h + 0.1, 8, 16).decaying);
  EXPECT_FALSE(covering_sum(M, 0.5, h - 0.1, 8, 16).decaying);
  auto huge = covering_sum(M, 0.5, 50.0, 8, 16);
  EXPECT_LT(huge.tails[0], 1e-80);
  for (std::size_t i = 1; i < huge.tails.size(); ++i) EXPECT_LE(huge.tails[i], huge.tails[i - 1]);
}

TEST(Energy, DiagonalAndZeroExponent) {
  Group g = f2();
  EmpiricalMeasure single;
  single.atoms = {g.parse("a b a")};
  single.M = 1;
  single.E_hat = 2.0;
  single.C = 10.0;
  single.in_B = true;
  EXPECT_NEAR(energy_W(g, single, 0.7, 0.5), std::pow(0.5, -0.7 * 3) / 4.0, 1e-12);
  single.in_B = false;
  EXPECT_EQ(energy_W(g, single, 0.7, 0.5), 0.0);

  BrwConfig c{.mu = StepDistribution::simple(g)};
  c.T = 12;
  auto tr = BrwSimulator(g, c).run();
  EXPECT_THROW(chi_n(g, tr, 2, 0, 0, 10.0, 0.0), ValidationError);
  // one particle: the mass is 0 or 1/E
  auto chi = chi_n(g, tr, 2, 0, 0, 10.0, 0.5);
  EXPECT_TRUE(chi.mass() == 0.0 || chi.mass() == static_cast<double>(chi.M) / 0.5);
}

TEST(Energy, MonotoneInTheExponentAndBoundedMass) {
  Group g = f2();
  auto traces = batch(g, 1.3, 30, 6, 4);
  auto held = batch(g, 1.3, 30, 6, 5);
  const double E = mean_transitional_count(g, held, 6, 0, 0);
  for (const auto& tr : traces) {
    auto chi = chi_n(g, tr, 6, 0, 0, 4.0, E);
    EXPECT_LE(chi.mass(), 4.0);
    double prev = energy_W(g, chi, 0.0, 0.5);
    if (chi.in_B) EXPECT_NEAR(prev, std::pow(chi.mass(), 2), 1e-12);
    for (double h : {0.2, 0.5, 1.0}) {
      const double w = energy_W(g, chi, h, 0.5);
      EXPECT_GE(w, prev);
      prev = w;
    }
  }
}

TEST(Hdim, SandwichIsOrdered) {
  Group g = f2();
  auto traces = batch(g, 1.15, 50, 12, 7);
  auto held = batch(g, 1.15, 50, 12, 8);
  const double F = (1 - std::sqrt(1 - 0.75 * 1.15 * 1.15)) / (1.5 * 1.15);
  auto rep = hdim_report(g, traces, held, 1.15, 0.5, std::log(3 * F), {.lo = 6, .hi = 10, .ray_depth = 8});
  EXPECT_LE(rep.h_lower, rep.h_upper);
  EXPECT_GT(rep.h_upper, 0.0);
  EXPECT_FALSE(rep.energies.empty());
}
