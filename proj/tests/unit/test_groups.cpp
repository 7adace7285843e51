#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

#include "brwlab/groups.hpp"

using namespace brwlab;

namespace {

// Breadth-first ball enumeration keyed on normal forms; independent of the
// structural enumerators used by Group::sphere.
std::vector<std::set<std::string>> bfs_spheres(const Group& g, int n_max) {
  std::vector<std::set<std::string>> layers(n_max + 1);
  std::unordered_set<std::string> seen{""};
  layers[0].insert("");
  for (int n = 0; n < n_max; ++n)
    for (const auto& code : layers[n])
      for (std::size_t s = 0; s < g.generators().size(); ++s) {
        Element y = g.multiply_generator(Element(code), static_cast<int>(s));
        if (seen.insert(y.code()).second) layers[n + 1].insert(y.code());
      }
  return layers;
}

Word random_word(const Group& g, int len, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.generators().size()) - 1);
  Word w(len);
  for (auto& x : w) x = pick(rng);
  return w;
}

Word inverse_word(const Group& g, const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (auto& x : out) x = g.generators()[x].inverse;
  return out;
}

std::vector<GroupSpec> sample_specs() {
  return {GroupSpec::free_group(2),
          GroupSpec::free_group(3),
          GroupSpec::free_abelian(2),
          GroupSpec::free_abelian(3),
          GroupSpec::cyclic(5),
          GroupSpec::free_product({GroupSpec::free_group(2), GroupSpec::free_abelian(3)}),
          GroupSpec::free_product({GroupSpec::cyclic(2), GroupSpec::cyclic(3)}),
          GroupSpec::free_product({GroupSpec::free_group(2), GroupSpec::free_abelian(1)})};
}

}  // namespace

TEST(Groups, FreeReductionCancels) {
  Group f2(GroupSpec::free_group(2));
  EXPECT_TRUE(f2.is_identity(f2.parse("a A")));
  EXPECT_EQ(f2.format(f2.parse("a b B a")), "a a");
  EXPECT_EQ(f2.word_length(f2.parse("a b A")), 3);
  EXPECT_EQ(f2.format(f2.identity()), "e");
}

TEST(Groups, FreeProductSyllableCancellation) {
  Group g(GroupSpec::free_product({GroupSpec::free_group(2), GroupSpec::free_abelian(1)}));
  Element x = g.parse("a t T b");
  auto s = g.syllables(x);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].factor, 0);
  EXPECT_EQ(g.factor(0).format(s[0].element), "a b");
}

TEST(Groups, AbelianIsCommutative) {
  Group z3(GroupSpec::free_abelian(3));
  EXPECT_EQ(z3.coordinates(z3.parse("x y x")), (std::vector<int>{2, 1, 0}));
  EXPECT_EQ(z3.word_length(z3.from_coordinates({2, -1, 0})), 3);
  Group z2(GroupSpec::free_abelian(2));
  EXPECT_EQ(z2.format_word(z2.geodesic(z2.from_coordinates({1, 1}))), "x y");
}

TEST(Groups, MultiplyBasics) {
  Group f2(GroupSpec::free_group(2));
  Element a = f2.parse("a");
  EXPECT_EQ(f2.multiply(f2.identity(), a), a);
  EXPECT_EQ(f2.format(f2.multiply(a, a)), "a a");
  Group d(GroupSpec::free_product({GroupSpec::cyclic(2), GroupSpec::cyclic(2)}));
  Element s = d.embed(0, d.factor(0).from_finite_index(1));
  EXPECT_TRUE(d.is_identity(d.multiply(s, s)));
}

TEST(Groups, SyllableExamples) {
  Group g(GroupSpec::free_product({GroupSpec::free_group(2), GroupSpec::free_abelian(1)}));
  EXPECT_TRUE(g.syllables(g.identity()).empty());
  auto s = g.syllables(g.parse("a t t b"));
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].factor, 0);
  EXPECT_EQ(s[1].factor, 1);
  EXPECT_EQ(g.factor(1).coordinates(s[1].element), std::vector<int>{2});
  EXPECT_EQ(s[2].factor, 0);
  EXPECT_EQ(g.from_syllables(s), g.parse("a t t b"));
  auto t = g.syllables(g.parse("T"));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(g.factor(1).coordinates(t[0].element), std::vector<int>{-1});
}

TEST(Groups, GeodesicReadsNormalForm) {
  Group f2(GroupSpec::free_group(2));
  EXPECT_TRUE(f2.geodesic(f2.identity()).empty());
  EXPECT_EQ(f2.format_word(f2.geodesic(f2.parse("a a b"))), "a a b");
}

TEST(Groups, UnknownGeneratorRejected) {
  Group f2(GroupSpec::free_group(2));
  EXPECT_THROW(f2.parse("a q"), ValidationError);
  EXPECT_THROW(f2.normalize({7}), ValidationError);
}

TEST(Groups, NonGroupTableRejected) {
  EXPECT_THROW(Group(GroupSpec::finite({{0, 1}, {1, 1}})), ValidationError);
  EXPECT_THROW(Group(GroupSpec::finite({{0, 1, 2}, {1, 2, 0}, {2, 1, 0}})), ValidationError);
  EXPECT_THROW(Group(GroupSpec::free_product({GroupSpec::free_group(2)})), ValidationError);
}

TEST(Groups, SphereSizesKnownValues) {
  Group f2(GroupSpec::free_group(2));
  EXPECT_EQ(f2.sphere(1).size(), 4u);
  EXPECT_EQ(f2.sphere(3).size(), 36u);
  Group z2(GroupSpec::free_abelian(2));
  EXPECT_EQ(z2.sphere(2).size(), 8u);
  EXPECT_EQ(f2.sphere(0).size(), 1u);
}

TEST(Groups, SphereMatchesBreadthFirstOracle) {
  for (const auto& spec : sample_specs()) {
    Group g(spec);
    const int n_max = spec.kind == GroupKind::FreeProduct ? 5 : 6;
    auto layers = bfs_spheres(g, n_max);
    auto sizes = g.sphere_sizes(n_max);
    for (int n = 0; n <= n_max; ++n) {
      auto sph = g.sphere(n);
      std::set<std::string> got;
      for (const auto& x : sph) {
        got.insert(x.code());
        EXPECT_EQ(g.word_length(x), n) << spec.label();
      }
      EXPECT_EQ(got.size(), sph.size()) << spec.label() << " duplicates at n=" << n;
      EXPECT_EQ(got, layers[n]) << spec.label() << " n=" << n;
      EXPECT_DOUBLE_EQ(sizes[n], static_cast<double>(layers[n].size())) << spec.label() << " n=" << n;
    }
  }
}

TEST(Groups, SphereCapReported) {
  Group f2(GroupSpec::free_group(2));
  try {
    f2.sphere(20, 1000);
    FAIL() << "expected CapExceeded";
  } catch (const CapExceeded& e) {
    EXPECT_NEAR(e.estimated_size(), 4.0 * std::pow(3.0, 19), 1.0);
  }
}

TEST(GroupsProperty, RoundTripWithReverseInverse) {
  std::mt19937_64 rng(7);
  for (const auto& spec : sample_specs()) {
    Group g(spec);
    for (int trial = 0; trial < 200; ++trial) {
      Word w = random_word(g, 1 + trial % 12, rng);
      Word both = w;
      auto inv = inverse_word(g, w);
      both.insert(both.end(), inv.begin(), inv.end());
      EXPECT_TRUE(g.is_identity(g.normalize(both))) << spec.label();
      Element x = g.normalize(w);
      EXPECT_EQ(g.multiply(x, g.inverse(x)), g.identity());
      EXPECT_EQ(g.word_length(x), g.word_length(g.inverse(x)));
      EXPECT_EQ(g.normalize(g.geodesic(x)), x);
      EXPECT_EQ(static_cast<int>(g.geodesic(x).size()), g.word_length(x));
      EXPECT_EQ(g.parse(g.format(x)), x) << spec.label() << " " << g.format(x);
    }
  }
}

TEST(GroupsProperty, TriangleInequalityAndAssociativity) {
  std::mt19937_64 rng(11);
  for (const auto& spec : sample_specs()) {
    Group g(spec);
    for (int trial = 0; trial < 200; ++trial) {
      Element x = g.normalize(random_word(g, 8, rng));
      Element y = g.normalize(random_word(g, 8, rng));
      Element z = g.normalize(random_word(g, 5, rng));
      EXPECT_LE(g.word_length(g.multiply(x, y)), g.word_length(x) + g.word_length(y));
      EXPECT_EQ(g.multiply(g.multiply(x, y), z), g.multiply(x, g.multiply(y, z)));
    }
  }
}

TEST(GroupsProperty, SphereGrowthBounds) {
  for (const auto& spec : sample_specs()) {
    Group g(spec);
    auto s = g.sphere_sizes(12);
    for (int n = 0; n < 12; ++n) EXPECT_LE(s[n + 1], s[1] * s[n]) << spec.label();
  }
  for (int q : {2, 3, 4}) {
    Group g(GroupSpec::free_group(q));
    auto s = g.sphere_sizes(12);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int n = 1; n <= 12; ++n) {
      EXPECT_DOUBLE_EQ(s[n], 2.0 * q * std::pow(2.0 * q - 1, n - 1));
      sx += n;
      sy += std::log(s[n]);
      sxx += n * n;
      sxy += n * std::log(s[n]);
    }
    double slope = (12 * sxy - sx * sy) / (12 * sxx - sx * sx);
    EXPECT_NEAR(slope, std::log(2.0 * q - 1), 0.05);
  }
}

TEST(Groups, FreeProductNameCollisionsUniquified) {
  Group g(GroupSpec::free_product({GroupSpec::free_group(2), GroupSpec::free_group(2)}));
  EXPECT_EQ(g.generator_index("a"), -1);
  EXPECT_GE(g.generator_index("a0"), 0);
  EXPECT_GE(g.generator_index("a1"), 0);
  EXPECT_EQ(g.format(g.parse("a1 B0")), "a1 B0");
}
