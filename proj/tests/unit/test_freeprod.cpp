#include <gtest/gtest.h>

#include <cmath>

#include "brwlab/freeprod.hpp"

using namespace brwlab;

namespace {

double f2_F(double r) { return (1.0 - std::sqrt(1.0 - 0.75 * r * r)) / (1.5 * r); }
double f2_G(double r) { return 1.0 / (1.0 - r * f2_F(r)); }

Group line_product() {
  return Group(GroupSpec::free_product({GroupSpec::free_abelian(1), GroupSpec::free_abelian(1)}));
}

Group f2_z3() { return Group(GroupSpec::free_product({GroupSpec::free_group(2), GroupSpec::free_abelian(3)})); }

}  // namespace

TEST(FactorOracle, FreeGroupClosedForm) {
  Group f2(GroupSpec::free_group(2));
  FactorOracle o(f2, StepDistribution::simple(f2));
  EXPECT_EQ(o.method(), "closed-form");
  EXPECT_NEAR(o.radius(), 2.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(o.green_ee(1.0), 1.5, 1e-14);
  EXPECT_NEAR(o.first_passage(1.1, f2.parse("a b")), f2_F(1.1) * f2_F(1.1), 1e-14);
  auto s = o.sphere_sums(1.0, 3);
  EXPECT_NEAR(s[3], 36.0 * 1.5 / 27.0, 1e-13);
  EXPECT_THROW(o.green_ee(1.2), DivergentSeries);
}

TEST(FactorOracle, LazyFreeGroupClosedForm) {
  Group f2(GroupSpec::free_group(2));
  FactorOracle lazy(f2, StepDistribution::simple(f2, 0.5));
  // holding at rate 1/2 rescales time: G'(t) = G(t/(2 - t)) * 2/(2 - t)
  const double t = 1.05;
  EXPECT_NEAR(lazy.green_ee(t), f2_G(t / (2.0 - t)) * 2.0 / (2.0 - t), 1e-12);
}

TEST(FactorOracle, LineContinuedFraction) {
  Group z(GroupSpec::free_abelian(1));
  FactorOracle o(z, StepDistribution::simple(z));
  EXPECT_EQ(o.method(), "chain");
  EXPECT_DOUBLE_EQ(o.radius(), 1.0);
  EXPECT_NEAR(o.green_ee(0.9), 1.0 / std::sqrt(1.0 - 0.81), 1e-10);
  // F_t(e, t^k) = ((1 - sqrt(1 - t^2)) / t)^k
  const double f = (1.0 - std::sqrt(1.0 - 0.81)) / 0.9;
  EXPECT_NEAR(o.first_passage(0.9, z.parse("t t t")), f * f * f, 1e-10);
}

TEST(FactorOracle, CubicLatticeReturnValue) {
  Group z3(GroupSpec::free_abelian(3));
  FactorOracle o(z3, StepDistribution::simple(z3));
  // expected visits to the origin of the simple walk on Z^3 (Watson)
  EXPECT_NEAR(o.green_ee(1.0), 1.516386059151978, 2e-4);
}

TEST(ProductEngine, LinesReproduceTheFreeGroup) {
  Group g = line_product();
  ProductEngine eng(g, StepDistribution::adapted(g, 0.5));
  EXPECT_NEAR(eng.critical_radius(), 2.0 / std::sqrt(3.0), 1e-6);
  EXPECT_NEAR(eng.green_ee(1.0), 1.5, 1e-9);
  const Group& z = g.factor(0);
  const Element x = g.multiply(g.embed(0, z.parse("t t")), g.embed(1, z.parse("T")));
  EXPECT_NEAR(eng.green(1.05, x), f2_G(1.05) * std::pow(f2_F(1.05), 3), 1e-9);
  auto H = eng.sphere_sums(1.05, 12);
  for (int n = 0; n <= 12; ++n) {
    const double exact = n == 0 ? f2_G(1.05) : f2_G(1.05) * 4.0 * std::pow(3.0, n - 1) * std::pow(f2_F(1.05), n);
    EXPECT_NEAR(H[n] / exact, 1.0, 1e-9) << n;
  }
  auto st = eng.solve(1.0);
  EXPECT_NEAR(st.w[0], st.w[1], 1e-12);
  EXPECT_THROW(eng.solve(1.2), DivergentSeries);
}

TEST(ProductEngine, AgreesWithTheLumpedChain) {
  Group g = f2_z3();
  auto mu = StepDistribution::adapted(g, 0.1);
  ProductEngine analytic(g, mu);
  // the chain is killed outside its domain; at r = 0.6 that costs < 1e-8
  ChainEngine direct(g, mu, {.chain_radius = 12, .analytic_products = false});
  const double r = 0.6;
  auto a = analytic.sphere_sums(r, 5);
  auto d = direct.sphere_sums(r, 5);
  for (int n = 0; n <= 5; ++n) EXPECT_NEAR(a[n] / d[n], 1.0, 1e-7) << n;
  for (int f = 0; f < 2; ++f) {
    auto af = analytic.factor_sphere_sums(r, f, 5);
    auto df = direct.factor_sphere_sums(r, f, 5);
    for (int n = 0; n <= 5; ++n) EXPECT_NEAR(af[n] / df[n], 1.0, 1e-7) << f << " " << n;
  }
  auto at = analytic.transitional_sphere_sums(r, 5, 1, 1);
  auto dt = direct.transitional_sphere_sums(r, 5, 1, 1);
  EXPECT_EQ(at[0], 0.0);
  for (int n = 0; n <= 5; ++n) EXPECT_NEAR(at[n], dt[n], 1e-7 * d[n]) << n;
}

TEST(ProductEngine, SyllableSplitsAreMultiplicative) {
  Group g = f2_z3();
  auto mu = StepDistribution::adapted(g, 0.1);
  ProductEngine analytic(g, mu);
  ChainEngine direct(g, mu, {.chain_radius = 12, .analytic_products = false});
  auto mc = check_multiplicativity(analytic, direct, 0.6, 5);
  EXPECT_GT(mc.elements, 100u);
  EXPECT_LT(mc.max_split_error, 1e-7);
  EXPECT_LT(mc.max_formula_error, 1e-7);
}

TEST(ProductEngine, MakeEngineDispatch) {
  Group g = f2_z3();
  auto mu = StepDistribution::adapted(g, 0.1);
  EXPECT_EQ(make_green_engine(g, mu)->method(), "free-product");
  EXPECT_NE(make_green_engine(g, mu, {.chain_radius = 6, .analytic_products = false})->method(), "free-product");
}

TEST(ReturnWeights, TruncationApproachesFromBelow) {
  Group g = line_product();
  ProductEngine eng(g, StepDistribution::adapted(g, 0.5));
  auto rw = return_weights(eng, 0.9, 20);
  EXPECT_TRUE(rw.valid);
  EXPECT_LE(rw.w_truncated, rw.w + 1e-12);
  EXPECT_LE(rw.w_prime_truncated, rw.w_prime + 1e-12);
  EXPECT_LT(rw.residual, 0.02);
  EXPECT_GE(rw.residual, -1e-12);
  auto z = zeta_maps(eng, 0.9);
  EXPECT_TRUE(z.valid);
  EXPECT_NEAR(z.zeta0, 0.45 / (1.0 - rw.w), 1e-14);
  EXPECT_LE(z.zeta0, z.R_mu0);
}

TEST(ReturnWeights, TransferIdentity) {
  Group g = line_product();
  auto mu = StepDistribution::adapted(g, 0.5);
  ProductEngine analytic(g, mu);
  ChainEngine direct(g, mu, {.chain_radius = 14, .analytic_products = false});
  const Group& z = g.factor(0);
  auto tc = verify_transfer(analytic, direct, 0.8,
                            {{z.identity(), z.identity()}, {z.identity(), z.parse("t")}, {z.parse("T"), z.parse("t t")}});
  EXPECT_TRUE(tc.pass) << tc.max_rel_error;
}

TEST(Landscape, NonDegenerateAtSmallAlpha) {
  Group g = f2_z3();
  auto rows = example_landscape(g, {0.1}, {0.5}, 10);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].degenerate[0]);
  EXPECT_FALSE(rows[0].degenerate[1]);
  EXPECT_GT(rows[0].R_P_at_critical[1], 1.0);
  EXPECT_GT(rows[0].R_hat, 1.2);
}
