#include <gtest/gtest.h>

#include <bit>

#include "fpp/derivative.hpp"
#include "fpp/errors.hpp"
#include "fpp/extremes.hpp"
#include "test_support.hpp"

using namespace fpp;
using namespace fpp::testing;

namespace {

std::vector<Lattice> instances() {
  std::vector<Lattice> out;
  out.push_back(box({{0, 3}, {0, 1}}));                       // 10 edges
  out.push_back(box({{0, 2}, {0, 2}}, 1, 4));                 // 12 edges, b >= 3a
  out.push_back(box({{0, 1}, {0, 1}, {0, 1}}, 2, 3));         // 12 edges, d = 3
  return out;
}

}  // namespace

TEST(RationalTest, ReducesAndOrders) {
  EXPECT_EQ(Rational::of(4, 2), (Rational{2, 1}));
  EXPECT_EQ(Rational::of(3, -6), (Rational{-1, 2}));
  EXPECT_EQ(Rational::of(0, 5), (Rational{0, 1}));
  EXPECT_EQ(Rational::of(-3, 6).str(), "-1/2");
  EXPECT_LT(Rational::of(1, 3), Rational::of(1, 2));
  EXPECT_GT(Rational::of(-1, 3), Rational::of(-1, 2));
  EXPECT_THROW(Rational::of(1, 0), Error);
  EXPECT_EQ(make_derivative(6, 3).normalized, (Rational{2, 1}));
}

TEST(DerivativeTest, OrderOneIsFirstDerivative) {
  std::mt19937_64 rng(10);
  for (const auto& g : instances()) {
    for (int t = 0; t < 40; ++t) {
      const Environment env = random_env(g, rng);
      const EdgeSubset s = random_subset(g, 1, rng);
      EXPECT_EQ(derivative_leibniz(g, env, s).raw, first_derivative(g, env, s[0]));
    }
  }
}

TEST(DerivativeTest, RepeatedEdgeGivesZero) {
  const Lattice g = box({{0, 3}, {0, 1}});
  PassageSolver solver(g);
  std::mt19937_64 rng(11);
  auto phi = [&solver](const Environment& x) { return solver.passage_time(x); };
  for (int t = 0; t < 50; ++t) {
    Environment env = random_env(g, rng);
    const EdgeSubset s = random_subset(g, 2, rng);
    const std::vector<EdgeId> same{s[0], s[0]};
    EXPECT_EQ(apply_derivatives(phi, env, same), 0);
    const std::vector<EdgeId> triple{s[1], s[0], s[0]};
    EXPECT_EQ(apply_derivatives(phi, env, triple), 0);
  }
  EXPECT_THROW(EdgeSubset({EdgeId{1}, EdgeId{1}}), Error);
}

TEST(DerivativeTest, UnitSquareHandOracle) {
  // f = min(w_bottom, 2a + w_top) from (0,0) to (1,0)
  for (auto [a, b, expected] : {std::tuple<Time, Time, Time>{1, 2, 0}, {1, 4, 1}, {2, 3, 0}, {1, 9, 6}}) {
    const Lattice g = box({{0, 1}, {0, 1}}, a, b, {0, 0}, {1, 0});
    const EdgeId bottom = g.encode_edge(Point{0, 0}, 0);
    const EdgeId top = g.encode_edge(Point{0, 1}, 0);
    auto f = [&](Time wb, Time wt) { return std::min(wb, 2 * a + wt); };
    const Time hand = f(b, b) - f(a, b) - f(b, a) + f(a, a);
    EXPECT_EQ(hand, expected);
    const EdgeSubset s({bottom, top});
    const Environment env(g.edge_count());
    EXPECT_EQ(derivative_leibniz(g, env, s).raw, hand);
    EXPECT_EQ(derivative_recursive(g, env, s).raw, hand);
  }
}

TEST(DerivativeTest, LeibnizMatchesOracle) {
  std::mt19937_64 rng(12);
  for (const auto& g : instances()) {
    const PlainGraph pg = plain_graph(g);
    for (int t = 0; t < 60; ++t) {
      const Environment env = random_env(g, rng);
      const EdgeSubset s = random_subset(g, 1 + rng() % 4, rng);
      EXPECT_EQ(derivative_leibniz(g, env, s).raw, oracle_derivative(g, pg, env, s.edges()));
    }
  }
}

TEST(DerivativeTest, ThreeMethodsAgree) {
  std::mt19937_64 rng(13);
  for (const auto& g : instances()) {
    PassageSolver solver(g);
    std::vector<EdgeId> all;
    for (std::uint32_t i = 0; i < g.edge_count(); ++i) all.push_back(EdgeId{i});
    const HypercubeTable table = build_hypercube(g, Environment(g.edge_count()), EdgeSubset(all));
    for (int t = 0; t < 500; ++t) {
      const Environment env = random_env(g, rng);
      const EdgeSubset s = random_subset(g, 1 + rng() % 5, rng);
      const DerivativeValue l = derivative_leibniz(solver, env, s);
      ASSERT_EQ(derivative_recursive(solver, env, s, Peel::largest), l);
      ASSERT_EQ(derivative_recursive(solver, env, s, Peel::smallest), l);
      ASSERT_EQ(derivative_from_table(table, s, table.mask_of(env)), l);
    }
  }
}

TEST(DerivativeTest, IgnoresPresetCoordinatesOfS) {
  std::mt19937_64 rng(14);
  const Lattice g = box({{0, 2}, {0, 2}}, 1, 4);
  for (int t = 0; t < 100; ++t) {
    Environment env = random_env(g, rng);
    const EdgeSubset s = random_subset(g, 3, rng);
    const Time base = derivative_leibniz(g, env, s).raw;
    for (EdgeId e : s) env.set(e, (rng() & 1U) != 0 ? Level::b : Level::a);
    EXPECT_EQ(derivative_leibniz(g, env, s).raw, base);
    EXPECT_EQ(derivative_recursive(g, env, s).raw, base);
  }
}

TEST(DerivativeTest, FirstDerivativeIsFixedUnderSigma) {
  std::mt19937_64 rng(15);
  const Lattice g = box({{0, 3}, {0, 1}});
  for (int t = 0; t < 100; ++t) {
    const Environment env = random_env(g, rng);
    const EdgeId j{static_cast<std::uint32_t>(rng() % g.edge_count())};
    const Time d = first_derivative(g, env, j);
    EXPECT_EQ(first_derivative(g, sigma(env, j, Level::a), j), d);
    EXPECT_EQ(first_derivative(g, sigma(env, j, Level::b), j), d);
  }
}

TEST(DerivativeTest, CapsAndEmptySet) {
  LatticeSpec spec;
  spec.radius = 2;
  const Lattice g = build_lattice(spec);
  const Environment env(g.edge_count());
  std::mt19937_64 rng(16);
  const EdgeSubset big = random_subset(g, 21, rng);
  try {
    derivative_leibniz(g, env, big);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::size_cap);
  }
  EXPECT_THROW(derivative_recursive(g, env, random_subset(g, 5, rng), Peel::largest, 4), Error);
  try {
    derivative_leibniz(g, env, EdgeSubset{});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
  try {
    build_hypercube(g, env, big);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::size_cap);
  }
}

TEST(HypercubeTest, EmptyVariableSetHoldsF) {
  const Lattice g = box({{0, 3}, {0, 1}});
  std::mt19937_64 rng(17);
  const Environment env = random_env(g, rng);
  const HypercubeTable t = build_hypercube(g, env, EdgeSubset{});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.values[0], passage_time(g, env));
}

TEST(HypercubeTest, EntriesMatchFreshPassageTimes) {
  std::mt19937_64 rng(18);
  for (const auto& g : instances()) {
    const Environment env = random_env(g, rng);
    const EdgeSubset v = random_subset(g, 8, rng);
    const HypercubeTable t = build_hypercube(g, env, v);
    const HypercubeTable r = reference::build_hypercube(g, env, v);
    EXPECT_EQ(t.values, r.values);
    const PlainGraph pg = plain_graph(g);
    for (int k = 0; k < 40; ++k) {
      const std::uint64_t mask = rng() % t.size();
      EXPECT_EQ(t.values[mask], oracle_passage(g, pg, t.environment(mask)));
      EXPECT_EQ(t.mask_of(t.environment(mask)), mask);
    }
  }
}

TEST(HypercubeTest, MonotoneAlongRaisedBits) {
  const Lattice g = box({{0, 2}, {0, 2}}, 1, 4);
  std::vector<EdgeId> all;
  for (std::uint32_t i = 0; i < g.edge_count(); ++i) all.push_back(EdgeId{i});
  const HypercubeTable t = build_hypercube(g, Environment(g.edge_count()), EdgeSubset(all));
  for (std::uint64_t m = 0; m < t.size(); ++m) {
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
      if (((m >> i) & 1U) == 0) ASSERT_LE(t.values[m], t.values[m | (std::uint64_t{1} << i)]);
    }
    EXPECT_EQ(t.values[m], passage_time(g, from_mask(g, m)));
  }
}

TEST(HypercubeTest, TableDerivativeMatchesLeibnizOnRandomDraws) {
  const Lattice g = box({{0, 3}, {0, 1}}, 2, 5);
  std::vector<EdgeId> all;
  for (std::uint32_t i = 0; i < g.edge_count(); ++i) all.push_back(EdgeId{i});
  const HypercubeTable t = build_hypercube(g, Environment(g.edge_count()), EdgeSubset(all));
  std::mt19937_64 rng(19);
  PassageSolver solver(g);
  for (int k = 0; k < 1000; ++k) {
    const std::uint64_t mask = rng() % t.size();
    const EdgeSubset s = random_subset(g, 1 + rng() % 6, rng);
    ASSERT_EQ(derivative_from_table(t, s, mask), derivative_leibniz(solver, from_mask(g, mask), s));
  }
}

TEST(HypercubeTest, MobiusReconstruction) {
  const Lattice g = box({{0, 2}, {0, 2}}, 1, 4);
  std::vector<EdgeId> all;
  for (std::uint32_t i = 0; i < g.edge_count(); ++i) all.push_back(EdgeId{i});
  const HypercubeTable t = build_hypercube(g, Environment(g.edge_count()), EdgeSubset(all));
  std::mt19937_64 rng(20);
  for (int k = 0; k < 200; ++k) {
    const std::uint64_t smask = rng() % t.size();
    const std::uint64_t corner = (rng() % t.size()) & ~smask;
    // f(corner + S) = sum over T in S of d_T f at the corner
    Time sum = 0;
    std::uint64_t sub = smask;
    while (true) {
      sum += sub == 0 ? t.values[corner] : cube_difference(t.values, sub, corner);
      if (sub == 0) break;
      sub = (sub - 1) & smask;
    }
    ASSERT_EQ(sum, t.values[corner | smask]);
  }
}

TEST(HypercubeTest, FullVariableSetIsOneAlternatingSum) {
  const Lattice g = box({{0, 2}, {0, 1}});
  std::mt19937_64 rng(21);
  const Environment env = random_env(g, rng);
  const EdgeSubset v = random_subset(g, 5, rng);
  const HypercubeTable t = build_hypercube(g, env, v);
  Time sum = 0;
  for (std::uint64_t m = 0; m < t.size(); ++m) {
    const int a_count = 5 - std::popcount(m);
    sum += a_count % 2 == 0 ? t.values[m] : -t.values[m];
  }
  EXPECT_EQ(derivative_from_table(t, v, 0).raw, sum);
  EXPECT_THROW(t.subset_mask(EdgeSubset({EdgeId{99}})), Error);
}

TEST(DerivativeBoundsTest, ExhaustiveOrdersOneToThree) {
  for (const auto& g : instances()) {
    const auto reports = exhaustive_extremes_upto(g, 3);
    const Time gap = g.gap();
    EXPECT_GE(reports[0].min_raw, 0);
    EXPECT_LE(reports[0].max_raw, gap);
    for (int k = 2; k <= 3; ++k) {
      EXPECT_GE(reports[static_cast<std::size_t>(k - 1)].min_raw, -gap);
      EXPECT_LE(reports[static_cast<std::size_t>(k - 1)].max_raw, gap);
    }
  }
}

TEST(DerivativeBoundsTest, SampledHigherOrders) {
  std::mt19937_64 rng(22);
  for (const auto& g : {box({{0, 3}, {0, 2}}, 1, 4), box({{0, 2}, {0, 2}, {0, 1}}, 1, 2)}) {
    PassageSolver solver(g);
    for (int t = 0; t < 300; ++t) {
      const std::size_t k = 4 + rng() % 3;
      const Environment env = random_env(g, rng);
      const EdgeSubset s = random_subset(g, k, rng);
      const Time d = derivative_leibniz(solver, env, s).raw;
      ASSERT_LE(std::abs(d), (Time{1} << (k - 2)) * g.gap());
    }
  }
}

TEST(DerivativeBoundsTest, RangeRecursionAcrossOrders) {
  for (const auto& g : instances()) {
    const auto reports = exhaustive_extremes_upto(g, 4);
    for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
      EXPECT_LE(reports[i + 1].max_raw, reports[i].max_raw - reports[i].min_raw);
      EXPECT_GE(reports[i + 1].min_raw, reports[i].min_raw - reports[i].max_raw);
    }
  }
}
