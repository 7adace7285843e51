#include <gtest/gtest.h>

#include <cmath>

#include "brwlab/chain.hpp"
#include "brwlab/measure.hpp"
#include "brwlab/stats.hpp"
#include "brwlab/transition.hpp"

using namespace brwlab;

namespace {

OrbitChain::Weights weights(const StepDistribution& mu) { return mu.support; }

// Per-element Green values of a lumped chain against the unlumped one on
// the same domain.
void expect_lumping_exact(const Group& g, const StepDistribution& mu, ChainOptions opt, double r) {
  OrbitChain lumped(g, weights(mu), opt);
  opt.lump = false;
  OrbitChain plain(g, weights(mu), opt);
  ASSERT_NE(lumped.lumping(), Lumping::Identity);
  ASSERT_LT(lumped.size(), plain.size());
  auto gl = lumped.green(r);
  auto gp = plain.green(r);
  for (std::size_t c = 0; c < plain.size(); ++c) {
    auto k = lumped.class_of(plain.representative(c));
    ASSERT_TRUE(k.has_value());
    EXPECT_NEAR(gl[*k], gp[c], 1e-12 * gp[c]) << g.format(plain.representative(c));
  }
}

}  // namespace

TEST(Chain, FreeGroupTwoStepReturn) {
  Group f2(GroupSpec::free_group(2));
  OrbitChain ch(f2, weights(StepDistribution::simple(f2)), {.radius = 10});
  EXPECT_EQ(ch.lumping(), Lumping::Radial);
  auto p = ch.powers(2);
  EXPECT_DOUBLE_EQ(p[2][0], 0.25);
  EXPECT_DOUBLE_EQ(p[1].sum(), 1.0);
}

TEST(Chain, FreeGroupGreenClosedForm) {
  Group f2(GroupSpec::free_group(2));
  OrbitChain ch(f2, weights(StepDistribution::simple(f2)), {.radius = 80});
  auto g = ch.green(1.0);
  EXPECT_NEAR(g[0], 1.5, 1e-12);
  EXPECT_NEAR(g[*ch.class_of(f2.parse("a"))], 0.5, 1e-12);
  EXPECT_NEAR(g[*ch.class_of(f2.parse("a B a"))], 1.5 / 27.0, 1e-12);
}

TEST(Chain, FreeGroupLanczosLowerBound) {
  Group f2(GroupSpec::free_group(2));
  OrbitChain ch(f2, weights(StepDistribution::simple(f2)), {.radius = 64});
  auto res = ch.lanczos(40);
  ASSERT_EQ(res.ritz.size(), 40u);
  for (std::size_t k = 1; k < res.ritz.size(); ++k) EXPECT_GE(res.ritz[k], res.ritz[k - 1] - 1e-15);
  EXPECT_LT(res.ritz.back(), std::sqrt(3.0) / 2.0);
  EXPECT_GT(res.ritz.back(), 0.86);
}

TEST(Chain, IntegerLineGreen) {
  Group z(GroupSpec::free_abelian(1));
  OrbitChain ch(z, weights(StepDistribution::simple(z)), {.radius = 400});
  EXPECT_EQ(ch.lumping(), Lumping::SignedPermutation);
  // G_r(0,0) = 1/sqrt(1 - r^2) for the simple walk on Z
  EXPECT_NEAR(ch.green(0.9)[0], 1.0 / std::sqrt(1.0 - 0.81), 1e-10);
}

TEST(Chain, SignedPermutationLumpingIsExact) {
  Group z3(GroupSpec::free_abelian(3));
  expect_lumping_exact(z3, StepDistribution::simple(z3, 0.2), {.radius = 7}, 0.95);
}

TEST(Chain, SyllabicLumpingIsExact) {
  Group g(GroupSpec::free_product({GroupSpec::free_group(2), GroupSpec::free_abelian(3)}));
  expect_lumping_exact(g, StepDistribution::adapted(g, 0.1), {.radius = 6, .factor_costs = {1, 2}}, 1.1);
}

TEST(Chain, RestrictedSeriesAvoidingIdentity) {
  Group f2(GroupSpec::free_group(2));
  OrbitChain ch(f2, weights(StepDistribution::simple(f2)), {.radius = 200});
  std::vector<char> allowed(ch.size(), 1);
  allowed[0] = 0;
  auto s = ch.restricted_series(1.0, allowed, 399);
  // first-return generating function U(1) = 1 - 1/G(1) = 1/3, plus the empty path
  EXPECT_NEAR(s[0], 1.0 + 1.0 / 3.0, 1e-8);
}

TEST(Chain, NonSymmetricWeightsRejectSymmetrisation) {
  Group z(GroupSpec::free_abelian(1));
  OrbitChain ch(z, {{z.parse("t"), 0.7}, {z.parse("T"), 0.3}}, {.radius = 5, .lump = false});
  EXPECT_FALSE(ch.symmetric());
  EXPECT_THROW(ch.green(0.5), ValidationError);
}

TEST(Transition, FreeGroupHasNoDeepPoints) {
  for (const auto& pl : classify_points({{0, 3}, {0, 2}}, 0, 2, 1)) EXPECT_TRUE(pl.transitional);
}

TEST(Transition, CosetStretchOfLengthTwoLPlusOne) {
  const int L = 2, eta = 2 * L - 1;
  // 2L free-group letters, 2L+1 letters in one Z^3 coset, 2L more letters
  auto labels = classify_points({{0, 2 * L}, {1, 2 * L + 1}, {0, 2 * L}}, 2, eta, L);
  ASSERT_EQ(labels.size(), static_cast<std::size_t>(6 * L + 2));
  const int s = 2 * L, t = s + 2 * L + 1;
  EXPECT_TRUE(labels[s].transitional);
  EXPECT_TRUE(labels[t].transitional);
  for (int p = s + 1; p < t; ++p) {
    EXPECT_FALSE(labels[p].transitional) << p;
    EXPECT_EQ(labels[p].factor, 1);
  }
}

TEST(Transition, ShortGeodesicsAreDeep) {
  EXPECT_FALSE(transitional_geodesic({{0, 1}, {1, 1}}, 2, 2, 4));
  EXPECT_FALSE(transitional_geodesic({{0, 3}, {1, 1}, {0, 1}}, 2, 0, 1));
  EXPECT_TRUE(transitional_geodesic({{0, 1}, {1, 1}, {0, 1}, {1, 1}, {0, 1}}, 2, 0, 1));
}

TEST(Stats, LineFitRecoversSlope) {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(0.5 * v - 1.0);
  auto f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 0.5, 1e-14);
  EXPECT_NEAR(f.intercept, -1.0, 1e-14);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-9);
}
