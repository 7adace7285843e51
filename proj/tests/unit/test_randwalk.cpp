#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "brwlab/freeprod.hpp"
#include "brwlab/randwalk.hpp"

using namespace brwlab;

namespace {

// Simple random walk on F_2: first-passage F(r) to a neighbour and G_r(e,e).
double f2_F(double r) { return (1.0 - std::sqrt(1.0 - 0.75 * r * r)) / (1.5 * r); }
double f2_G(double r) { return 1.0 / (1.0 - r * f2_F(r)); }
const double kRhoF2 = std::sqrt(3.0) / 2.0;

}  // namespace

TEST(Convolve, ReturnProbabilitiesOnTheLine) {
  Group z(GroupSpec::free_abelian(1));
  auto t = convolve(z, StepDistribution::simple(z), 12);
  EXPECT_TRUE(t.lumped());
  EXPECT_DOUBLE_EQ(t.p(4, z.identity()), 6.0 / 16.0);
  EXPECT_DOUBLE_EQ(t.p(3, z.identity()), 0.0);
  EXPECT_NEAR(t.row_sum(12), 1.0, 1e-14);
}

TEST(Convolve, ElementDynamicProgramMatchesLumpedChain) {
  Group f2(GroupSpec::free_group(2));
  auto mu = StepDistribution::simple(f2);
  auto a = convolve(f2, mu, 6);
  auto b = convolve(f2, mu, 6, {.lump = false});
  EXPECT_FALSE(b.lumped());
  for (int n = 0; n <= 6; ++n)
    for (const auto& x : f2.ball(n)) EXPECT_NEAR(a.p(n, x), b.p(n, x), 1e-15);
  EXPECT_DOUBLE_EQ(a.p(2, f2.identity()), 0.25);
  std::ostringstream os;
  a.write_csv(os);
  EXPECT_EQ(os.str().substr(0, 8), "n,x,p_n\n");
}

TEST(SpectralRadius, FreeGroupCertifiedLowerBound) {
  Group f2(GroupSpec::free_group(2));
  auto est = spectral_radius(f2, StepDistribution::simple(f2), 40);
  EXPECT_TRUE(est.monotone);
  EXPECT_TRUE(est.nonamenable);
  EXPECT_GE(est.rho_lower, 0.860);
  EXPECT_LE(est.rho_lower, kRhoF2);
  EXPECT_NEAR(est.R_hat, 1.0 / est.rho_lower, 1e-15);
}

TEST(Green, FreeGroupMatchesClosedForm) {
  Group f2(GroupSpec::free_group(2));
  auto mu = StepDistribution::simple(f2);
  for (double r : {1.0, 1.05}) {
    auto vals = green_many(f2, mu, r, {f2.identity(), f2.parse("a"), f2.parse("a b A")}, 60);
    const int len[] = {0, 1, 3};
    for (int i = 0; i < 3; ++i) {
      ASSERT_TRUE(vals[i].certified);
      const double exact = f2_G(r) * std::pow(f2_F(r), len[i]);
      EXPECT_LE(std::abs(vals[i].value - exact), vals[i].tail_bound + 1e-8) << r << " " << i;
    }
  }
}

TEST(Green, DivergesBeyondTheRadius) {
  Group f2(GroupSpec::free_group(2));
  EXPECT_THROW(green(f2, StepDistribution::simple(f2), 1.3, f2.identity(), 20), DivergentSeries);
}

TEST(Green, RestrictedAvoidingIdentity) {
  Group f2(GroupSpec::free_group(2));
  auto avoid_e = [&](const Element& x) { return !f2.is_identity(x); };
  auto v = green_restricted(f2, StepDistribution::simple(f2), 0.4, f2.identity(), f2.identity(), avoid_e, 24);
  // empty path plus first returns
  EXPECT_NEAR(v.value, 2.0 - 1.0 / f2_G(0.4), 1e-9);
  EXPECT_FALSE(v.domain_truncated);
}

TEST(Engine, FreeGroupSphereSums) {
  Group f2(GroupSpec::free_group(2));
  ChainEngine eng(f2, StepDistribution::simple(f2));
  EXPECT_NEAR(eng.critical_radius(), 1.0 / kRhoF2, 1e-5);
  const double r = 1.05;
  auto H = eng.sphere_sums(r, 10);
  EXPECT_NEAR(H[0], f2_G(r), 1e-10);
  for (int n = 1; n <= 10; ++n) {
    const double exact = f2_G(r) * 4.0 * std::pow(3.0, n - 1) * std::pow(f2_F(r), n);
    EXPECT_NEAR(H[n] / exact, 1.0, 1e-9) << n;
  }
}

TEST(GrowthRate, GeometricSequence) {
  std::vector<double> H;
  for (int n = 0; n <= 14; ++n) H.push_back(2.0 * std::exp(0.4 * n));
  auto est = omega_from_sums(1.0, H);
  EXPECT_EQ(est.window_start, 8);
  EXPECT_EQ(est.window_end, 14);
  EXPECT_NEAR(est.omega_hat, 0.4, 1e-12);
  EXPECT_NEAR(est.C_hat, 2.0, 1e-12);
  EXPECT_NEAR(est.spread, 1.0, 1e-12);
  EXPECT_TRUE(est.agree);
}

TEST(GrowthRate, FreeGroupOmega) {
  Group f2(GroupSpec::free_group(2));
  ChainEngine eng(f2, StepDistribution::simple(f2));
  auto est = omega_estimate(eng, 1.05, 14);
  EXPECT_NEAR(est.omega_hat, std::log(3.0 * f2_F(1.05)), 1e-9);
  EXPECT_NEAR(volume_growth(f2, 14), std::log(3.0), 1e-3);
}

TEST(Poincare, ConvergesBelowAndDivergesAtTheRate) {
  Group f2(GroupSpec::free_group(2));
  ChainEngine eng(f2, StepDistribution::simple(f2));
  const double w = std::log(3.0 * f2_F(1.05));
  EXPECT_FALSE(poincare_series(eng, 1.05, w + 0.2, 30).divergent_looking);
  EXPECT_TRUE(poincare_series(eng, 1.05, w, 30).divergent_looking);
}

TEST(Parabolic, FreeGroupAsProductOfLines) {
  // Z * Z with equal weights is the simple walk on F_2; each factor is a line
  Group g(GroupSpec::free_product({GroupSpec::free_abelian(1), GroupSpec::free_abelian(1)}));
  ChainEngine eng(g, StepDistribution::adapted(g, 0.5), {.chain_radius = 16});
  auto H1 = eng.factor_sphere_sums(0.8, 0, 8);
  for (int n = 1; n <= 8; ++n) EXPECT_NEAR(H1[n] / (2.0 * f2_G(0.8) * std::pow(f2_F(0.8), n)), 1.0, 1e-6);
  ProductEngine exact(g, StepDistribution::adapted(g, 0.5));
  auto rep = parabolic_gap_check(exact, 1.1, 14);
  ASSERT_EQ(rep.factors.size(), 2u);
  EXPECT_NEAR(rep.omega_gamma, std::log(3.0 * f2_F(1.1)), 1e-6);
  for (const auto& f : rep.factors) {
    EXPECT_TRUE(f.subexponential);
    EXPECT_NEAR(f.omega_P, std::log(f2_F(1.1)), 1e-6);
    EXPECT_TRUE(f.gap);
  }
}
