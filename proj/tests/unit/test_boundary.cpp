#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "brwlab/boundary.hpp"

using namespace brwlab;

namespace {

Group f2() { return Group(GroupSpec::free_group(2)); }
Group f2_z3() { return Group(GroupSpec::free_product({GroupSpec::free_group(2), GroupSpec::free_abelian(3)})); }

}  // namespace

TEST(Floyd, TreePathsAreGeodesics) {
  Group g = f2();
  FloydMetric fm(g, 0.5, 5);
  EXPECT_EQ(fm.distance(g.parse("a b"), g.parse("a b")), 0.0);
  EXPECT_DOUBLE_EQ(fm.distance(g.identity(), g.parse("a")), 1.0);
  // a^n to b^n runs through e: 2 (1 + 1/2 + ... + 2^{1-n})
  for (int n = 1; n <= 5; ++n) {
    const double expect = 2.0 * (2.0 - std::pow(0.5, n - 1));
    const Element an = g.normalize(Word(n, g.generator_index("a")));
    const Element bn = g.normalize(Word(n, g.generator_index("b")));
    EXPECT_NEAR(fm.distance(an, bn), expect, 1e-14);
  }
  EXPECT_THROW(fm.distance(g.identity(), g.normalize(Word(6, 0))), ValidationError);
}

TEST(Floyd, MetricAxiomsOnRandomTriples) {
  Group g = f2_z3();
  FloydMetric fm(g, 0.6, 4);
  const auto& el = fm.elements();
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, el.size() - 1);
  for (int t = 0; t < 30; ++t) {
    const Element &x = el[pick(rng)], &y = el[pick(rng)], &z = el[pick(rng)];
    EXPECT_EQ(fm.distance(x, y), fm.distance(y, x));
    EXPECT_LE(fm.distance(x, z), fm.distance(x, y) + fm.distance(y, z) + 1e-12);
  }
}

TEST(Floyd, BasepointChange) {
  Group g = f2_z3();
  const double lambda = 0.6;
  const Element o2 = g.parse("a x");
  FloydMetric at_e(g, lambda, 4), at_o(g, lambda, 4, o2);
  const double factor = std::pow(lambda, -g.word_length(o2));
  const auto& el = at_e.elements();
  for (std::size_t i = 0; i < el.size(); i += 97) {
    auto de = at_e.distances_from(el[i]);
    auto dov = at_o.distances_from(el[i]);
    for (std::size_t j = 0; j < el.size(); j += 13) EXPECT_LE(de[j], factor * dov[j] + 1e-12);
  }
}

TEST(Floyd, DoublingSettlesOnTrees) {
  Group g = f2();
  auto v = floyd_distance(g, g.parse("a a"), g.parse("a b"), 0.5, g.identity());
  EXPECT_TRUE(v.converged);
  EXPECT_DOUBLE_EQ(v.value, 1.0);
}

TEST(Ends, FreeGroupSeparation) {
  Group g = f2();
  EXPECT_EQ(visual_distance_ends(g, {g.parse("a")}, {g.parse("a a a")}, 0.5), 0.0);
  EXPECT_EQ(visual_distance_ends(g, {g.parse("a")}, {g.parse("b")}, 0.5), 1.0);
  EXPECT_EQ(visual_distance_ends(g, {g.parse("a b a")}, {g.parse("a b b")}, 0.5), 0.25);
  EXPECT_EQ(visual_distance_ends(g, {g.parse("a b")}, {g.parse("a b a")}, 0.5), 0.25);
  EXPECT_THROW(visual_distance_ends(Group(GroupSpec::free_abelian(2)), {}, {}, 0.5), ValidationError);
}

TEST(Ends, FreeProductSeparation) {
  Group g = f2_z3();
  // parting inside a Z^3 coset happens where the shorter syllable ends
  EXPECT_EQ(separation_radius(g, {g.parse("a x x a")}, {g.parse("a x y b")}), 3);
  EXPECT_EQ(separation_radius(g, {g.parse("a x x a")}, {g.parse("a x x x a")}), 3);
  EXPECT_EQ(separation_radius(g, {g.parse("a x")}, {g.parse("b x")}), 0);
  EXPECT_EQ(separation_radius(g, {g.parse("a x")}, {g.parse("a x")}), -1);
  // the line factor is two-ended: opposite directions part at once
  Group zz(GroupSpec::free_product({GroupSpec::free_abelian(1), GroupSpec::free_abelian(1)}));
  const Element t = zz.embed(0, zz.factor(0).parse("t"));
  const Element T = zz.inverse(t);
  const Element s = zz.embed(1, zz.factor(1).parse("t"));
  EXPECT_EQ(separation_radius(zz, {zz.multiply(t, s)}, {zz.multiply(T, s)}), 0);
}

TEST(Ends, VisualBelowFloydOfApproximants) {
  Group g = f2();
  const double lambda = 0.5;
  FloydMetric fm(g, lambda, 7);
  const std::vector<Element> rays{g.parse("a a a a a a"), g.parse("a b b b b b"), g.parse("a b a a a a"),
                                  g.parse("B B B B B B")};
  for (const auto& x : rays)
    for (const auto& y : rays)
      EXPECT_LE(visual_distance_ends(g, {x}, {y}, lambda), fm.distance(x, y) + std::pow(lambda, 6));
}

TEST(Transition, LabelsOnBothVariants) {
  Group g = f2();
  for (const auto& p : classify_transition_points(g, g.parse("a b a"), 1, 1)) EXPECT_TRUE(p.transitional);
  Group h = f2_z3();
  auto lab = classify_transition_points(h, h.parse("a b a b x x x x x a b a b"), 3, 2);
  ASSERT_EQ(lab.size(), 14u);
  EXPECT_TRUE(lab[4].transitional);
  for (int p = 5; p < 9; ++p) EXPECT_FALSE(lab[p].transitional) << p;
  EXPECT_TRUE(lab[9].transitional);
}

TEST(Shadow, FreeGroupCylinders) {
  Group g = f2();
  auto whole = shadow(g, g.identity(), 0, 0.5, 3);
  EXPECT_EQ(whole.cells.size(), g.sphere(3).size());
  EXPECT_EQ(whole.visual_diameter, 1.0);
  const Element x = g.parse("a b a");
  auto s0 = shadow(g, x, 0, 0.5);
  EXPECT_EQ(s0.cells.size(), 9u);
  EXPECT_DOUBLE_EQ(s0.visual_diameter, std::pow(0.5, 3));
  auto s1 = shadow(g, x, 1, 0.5, -1, true);
  EXPECT_DOUBLE_EQ(s1.visual_diameter, std::pow(0.5, 2));
  EXPECT_GE(s1.floyd_diameter, s1.visual_diameter);
  std::ostringstream os;
  write_shadow_csv(g, {s0, s1}, 0.5, os);
  EXPECT_EQ(os.str().substr(0, 34), "x,K,floyd_diam,visual_diam,bound\na");
}

TEST(Shadow, FittedConstantOnTheFreeGroup) {
  Group g = f2();
  std::vector<Shadow> all;
  for (int len = 0; len <= 6; ++len)
    for (int K = 0; K <= 2; ++K) all.push_back(shadow(g, g.normalize(Word(len, g.generator_index("a"))), K, 0.5));
  auto fit = fit_shadow_constant(all, 0.5);
  EXPECT_DOUBLE_EQ(fit.C_hat, 1.0);
  EXPECT_TRUE(fit.stable);
}
