#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "brwlab/brw.hpp"
#include "brwlab/randwalk.hpp"

using namespace brwlab;

namespace {

Group f2() { return Group(GroupSpec::free_group(2)); }

BrwConfig base(const Group& g, double mean, int T, std::uint64_t seed = 3) {
  BrwConfig c{.mu = StepDistribution::simple(g)};
  c.nu = mean == 1.0 ? OffspringDistribution::fixed(1) : OffspringDistribution::geometric(mean);
  c.T = T;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Offspring, GeometricMeanAndValidation) {
  auto nu = OffspringDistribution::geometric(1.1);
  EXPECT_NEAR(nu.mean(), 1.1, 1e-12);
  EXPECT_EQ(nu.sample(0.0), 1);
  EXPECT_EQ(OffspringDistribution::fixed(3).sample(0.7), 3);
  EXPECT_THROW(OffspringDistribution({0.5, 0.5}), ValidationError);
}

TEST(Brw, SingleParticleIsAWalk) {
  Group g = f2();
  auto tr = BrwSimulator(g, base(g, 1.0, 30)).run();
  EXPECT_EQ(tr.generations, 30);
  for (auto p : tr.population) EXPECT_EQ(p, 1u);
  std::uint64_t total = 0;
  for (const auto& [x, z] : tr.elements()) total += z;
  EXPECT_EQ(total, 31u);
}

TEST(Brw, ZeroHorizonTrace) {
  Group g = f2();
  auto tr = BrwSimulator(g, base(g, 2.0, 0)).run();
  EXPECT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr.visits(g.identity()), 1u);
  std::ostringstream os;
  tr.write_csv(g, os);
  EXPECT_EQ(os.str(), "x,|x|,Z_x\ne,0,1\n");
}

TEST(Brw, ThreadCountDoesNotChangeTheTrace) {
  Group g = f2();
  auto c = base(g, 1.6, 14);
  auto one = BrwSimulator(g, c).run(2);
  c.threads = 4;
  auto four = BrwSimulator(g, c).run(2);
  EXPECT_GT(one.population.back(), 1000u);
  EXPECT_EQ(one.population, four.population);
  EXPECT_EQ(one.elements(), four.elements());
}

TEST(Brw, PopulationMeanGrowsLikeTheOffspringMean) {
  Group g = f2();
  auto c = base(g, 1.3, 10);
  c.replicas = 400;
  c.threads = 4;
  double total = 0;
  for (const auto& tr : BrwSimulator(g, c).run_replicas()) total += static_cast<double>(tr.population.back());
  const double mean = total / 400.0;
  EXPECT_NEAR(mean / std::pow(1.3, 10), 1.0, 0.15);
}

TEST(Brw, CapTruncates) {
  Group g = f2();
  auto c = base(g, 3.0, 40);
  c.K = 5000;
  auto tr = BrwSimulator(g, c).run();
  EXPECT_TRUE(tr.truncated);
  EXPECT_LT(tr.generations, 40);
}

TEST(Brw, FreezingRegions) {
  Group g = f2();
  auto everywhere = freeze(g, base(g, 2.0, 10), [](const Element&) { return true; });
  ASSERT_EQ(everywhere.size(), 1u);
  EXPECT_EQ(everywhere[0].generation, 0);
  const int n = 4;
  auto outside = freeze(g, base(g, 1.5, 30), [&](const Element& x) { return g.word_length(x) >= n; });
  EXPECT_FALSE(outside.empty());
  for (const auto& p : outside) {
    EXPECT_EQ(g.word_length(p.position), n);
    EXPECT_GE(p.generation, n);
  }
}

TEST(Brw, OccupationMatchesTheFirstMoment) {
  Group g = f2();
  auto c = base(g, 1.05, 2);
  c.replicas = 20000;
  c.threads = 4;
  auto m = many_to_one_check(g, c, {g.identity(), g.parse("a b")});
  // expected visits at horizon 2: 1 + r^2/4 at e, r^2/16 at ab
  EXPECT_NEAR(m[0].expected, 1.0 + 1.05 * 1.05 / 4.0, 1e-12);
  EXPECT_NEAR(m[1].expected, 1.05 * 1.05 / 16.0, 1e-12);
  for (const auto& v : m) EXPECT_LT(std::abs(v.z), 4.0);
}

TEST(Brw, LimitRaysAndTracking) {
  Group g = f2();
  auto tr = BrwSimulator(g, base(g, 1.4, 20)).run();
  auto root = limit_rays(g, tr, 0);
  ASSERT_EQ(root.size(), 1u);
  EXPECT_TRUE(g.is_identity(root[0]));
  auto cells = limit_rays(g, tr, 3);
  EXPECT_FALSE(cells.empty());
  for (const auto& c : cells) EXPECT_EQ(g.word_length(c), 3);
  // a visited element is tracked by its own trace at distance 0
  Element far;
  for (const auto& [x, z] : tr.elements())
    if (g.word_length(x) > g.word_length(far)) far = x;
  auto d = tracking_diagnostic(g, tr, far, 0, 0);
  EXPECT_EQ(d.kappa_hat, 0.0);
  EXPECT_FALSE(d.censored);
}

TEST(Brw, GrowthSlopeOfAGeometricTrace) {
  Group g = f2();
  auto tr = BrwSimulator(g, base(g, 1.1, 40, 11)).run();
  EXPECT_GT(tr.radius(), 10);
  EXPECT_THROW(trace_growth_slope(tr, 5, 5), ValidationError);
  EXPECT_GT(trace_growth_slope(tr, 2, 8), 0.0);
}
