#include <gtest/gtest.h>

#include <array>

#include "fpp/errors.hpp"
#include "fpp/passage.hpp"
#include "test_support.hpp"

using namespace fpp;
using namespace fpp::testing;

namespace {

// [0,1]^2 with source (0,0) and sink (1,0): the direct edge or a 3-step detour.
Lattice unit_square_side(Time a = 1, Time b = 2) { return box({{0, 1}, {0, 1}}, a, b, {0, 0}, {1, 0}); }

std::vector<Lattice> small_instances() {
  std::vector<Lattice> out;
  out.push_back(box({{0, 2}, {0, 1}}));                  // 7 edges
  out.push_back(box({{0, 2}, {0, 1}}, 1, 4, {0, 1}, {2, 0}));
  out.push_back(box({{0, 3}, {0, 1}}, 2, 3));            // 10 edges
  out.push_back(box({{0, 1}, {0, 1}, {0, 1}}));          // 12 edges
  out.push_back(box({{0, 2}, {0, 2}}, 1, 4, {1, 0}, {1, 2}));  // 12 edges
  return out;
}

}  // namespace

TEST(PassageTest, UnitSquareExamples) {
  const Lattice g = unit_square_side();
  const EdgeId direct = g.encode_edge(Point{0, 0}, 0);
  Environment env(g.edge_count());
  EXPECT_EQ(passage_time(g, env), 1);
  env.set(direct, Level::b);
  EXPECT_EQ(passage_time(g, env), 2);  // min(2, 3)
  EXPECT_EQ(passage_time(g, Environment(g.edge_count(), Level::b)), 2);

  const Lattice wide = unit_square_side(1, 5);
  Environment w(wide.edge_count());
  w.set(direct, Level::b);
  EXPECT_EQ(passage_time(wide, w), 3);  // detour wins
}

TEST(PassageTest, MatchesBellmanFordOracle) {
  std::mt19937_64 rng(1);
  for (const auto& g : small_instances()) {
    const PlainGraph pg = plain_graph(g);
    PassageSolver solver(g);
    for (int t = 0; t < 200; ++t) {
      const Environment env = random_env(g, rng);
      ASSERT_EQ(solver.passage_time(env), oracle_passage(g, pg, env));
    }
  }
  LatticeSpec s;
  s.dim = 3;
  s.radius = 1;
  s.a = 3;
  s.b = 7;
  const Lattice big = build_lattice(s);
  const PlainGraph pg = plain_graph(big);
  for (int t = 0; t < 20; ++t) {
    const Environment env = random_env(big, rng);
    ASSERT_EQ(passage_time(big, env), oracle_passage(big, pg, env));
  }
}

TEST(PassageTest, AtLeastAlTimesGraphDistance) {
  std::mt19937_64 rng(2);
  for (const auto& g : small_instances()) {
    for (int t = 0; t < 50; ++t) {
      EXPECT_GE(passage_time(g, random_env(g, rng)), g.a() * g.graph_distance());
    }
  }
}

TEST(PassageTest, ForbiddenEdgeForcesDetour) {
  const Lattice g = unit_square_side();
  PassageSolver solver(g);
  const Environment env(g.edge_count());
  EXPECT_EQ(solver.passage_time(env, g.encode_edge(Point{0, 0}, 0)), 3);
}

TEST(GeodesicDagTest, DistanceInvariants) {
  std::mt19937_64 rng(3);
  for (const auto& g : small_instances()) {
    for (int t = 0; t < 30; ++t) {
      const Environment env = random_env(g, rng);
      const GeodesicDag dag = geodesic_dag(g, env);
      EXPECT_EQ(dag.from_source[g.source()], 0);
      EXPECT_EQ(dag.to_sink[g.sink()], 0);
      EXPECT_EQ(dag.passage_time, dag.from_source[g.sink()]);
      EXPECT_EQ(dag.passage_time, dag.to_sink[g.source()]);
      EXPECT_EQ(dag.passage_time, passage_time(g, env));
    }
  }
}

TEST(GeodesicDagTest, SquareDiagonalHasFourGeodesicEdges) {
  const Lattice g = box({{0, 1}, {0, 1}});
  const GeodesicDag dag = geodesic_dag(g, Environment(g.edge_count()));
  int on = 0;
  for (std::uint32_t j = 0; j < g.edge_count(); ++j) {
    on += dag.on_geodesic(EdgeId{j}) ? 1 : 0;
    EXPECT_TRUE(dag.uses(EdgeId{j}, kForward));  // monotone paths only go up
    EXPECT_FALSE(dag.uses(EdgeId{j}, kBackward));
  }
  EXPECT_EQ(on, 4);
}

TEST(GeodesicDagTest, OrientationsMatchPathEnumeration) {
  for (const auto& g : {box({{0, 2}, {0, 1}}, 1, 4, {0, 1}, {2, 0}), box({{0, 2}, {0, 1}}, 1, 2, {1, 0}, {1, 1})}) {
    const PlainGraph pg = plain_graph(g);
    const auto paths = all_simple_paths(pg);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << g.edge_count()); ++mask) {
      const Environment env = from_mask(g, mask);
      Time best = std::numeric_limits<Time>::max();
      for (const auto& p : paths) best = std::min(best, path_cost(g, env, p));
      std::vector<std::uint8_t> expect(g.edge_count(), kNone);
      for (const auto& p : paths) {
        if (path_cost(g, env, p) != best) continue;
        for (const auto& s : p) expect[s.edge.index] |= s.forward ? kForward : kBackward;
      }
      const GeodesicDag dag = geodesic_dag(g, env);
      ASSERT_EQ(dag.passage_time, best);
      ASSERT_EQ(dag.orientation, expect) << "mask " << mask;
    }
  }
}

TEST(SigmaTest, Algebra) {
  const Lattice g = box({{0, 2}, {0, 1}});
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const Environment w = random_env(g, rng);
    for (std::uint32_t i = 0; i < g.edge_count(); ++i) {
      const EdgeId ei{i};
      for (Level al : {Level::a, Level::b}) {
        for (Level be : {Level::a, Level::b}) {
          EXPECT_EQ(sigma(sigma(w, ei, be), ei, al), sigma(w, ei, al));
          for (std::uint32_t j = 0; j < g.edge_count(); ++j) {
            if (i == j) continue;
            const EdgeId ej{j};
            EXPECT_EQ(sigma(sigma(w, ej, be), ei, al), sigma(sigma(w, ei, al), ej, be));
          }
        }
      }
    }
  }
  const Environment all_a(g.edge_count());
  EXPECT_EQ(sigma(all_a, EdgeId{2}, Level::a), all_a);
  Environment copy = all_a;
  (void)sigma(copy, EdgeId{2}, Level::b);
  EXPECT_EQ(copy, all_a);
}

TEST(SigmaTest, VectorForm) {
  const Lattice g = box({{0, 2}, {0, 1}});
  std::mt19937_64 rng(5);
  const Environment w = random_env(g, rng);
  EXPECT_EQ(sigma_vector(w, {}, {}), w);
  const std::array<EdgeId, 1> one{EdgeId{3}};
  const std::array<Level, 1> lv{Level::b};
  EXPECT_EQ(sigma_vector(w, one, lv), sigma(w, EdgeId{3}, Level::b));

  std::vector<EdgeId> edges{EdgeId{0}, EdgeId{4}, EdgeId{6}};
  std::vector<Level> levels{Level::b, Level::a, Level::b};
  const Environment ref = sigma_vector(w, edges, levels);
  std::vector<int> order{0, 1, 2};
  do {
    std::vector<EdgeId> e2;
    std::vector<Level> l2;
    for (int i : order) {
      e2.push_back(edges[static_cast<std::size_t>(i)]);
      l2.push_back(levels[static_cast<std::size_t>(i)]);
    }
    EXPECT_EQ(sigma_vector(w, e2, l2), ref);
  } while (std::next_permutation(order.begin(), order.end()));

  const std::vector<Level> short_levels{Level::a};
  EXPECT_THROW(sigma_vector(w, edges, short_levels), Error);
  const std::vector<EdgeId> dup{EdgeId{1}, EdgeId{1}};
  const std::vector<Level> two{Level::a, Level::b};
  EXPECT_THROW(sigma_vector(w, dup, two), Error);
}

TEST(ClassifyTest, UnitSquareDirectEdge) {
  const Lattice g = unit_square_side();
  const EdgeId direct = g.encode_edge(Point{0, 0}, 0);
  const Environment env(g.edge_count());
  const EdgeClassification c = classify_edge(g, env, direct);
  EXPECT_TRUE(c.essential);
  EXPECT_TRUE(c.semi_essential);
  EXPECT_TRUE(c.influential);
  EXPECT_TRUE(c.very_influential);  // min(2, 3) - 1 = b - a
  EXPECT_EQ(first_derivative(g, env, direct), 1);

  const EdgeId top = g.encode_edge(Point{0, 1}, 0);
  const EdgeClassification t = classify_edge(g, env, top);
  EXPECT_FALSE(t.semi_essential);
  EXPECT_FALSE(t.essential);
  EXPECT_FALSE(t.influential);
  EXPECT_EQ(first_derivative(g, env, top), 0);
}

TEST(ClassifyTest, FarEdgeIsNotSemiEssential) {
  LatticeSpec s;
  s.radius = 2;
  const Lattice g = build_lattice(s);
  const Environment env(g.edge_count());
  const EdgeId far = g.encode_edge(Point{-4, -4}, 0);
  EXPECT_FALSE(classify_edge(g, env, far).semi_essential);
  EXPECT_EQ(first_derivative(g, env, far), 0);
}

TEST(ClassifyTest, EssentialMatchesEveryGeodesicUsesEdge) {
  const Lattice g = box({{0, 2}, {0, 1}}, 1, 3, {0, 0}, {2, 1});
  const PlainGraph pg = plain_graph(g);
  const auto paths = all_simple_paths(pg);
  PassageSolver solver(g);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << g.edge_count()); ++mask) {
    const Environment env = from_mask(g, mask);
    Time best = std::numeric_limits<Time>::max();
    for (const auto& p : paths) best = std::min(best, path_cost(g, env, p));
    for (std::uint32_t j = 0; j < g.edge_count(); ++j) {
      bool every = true;
      bool some = false;
      for (const auto& p : paths) {
        if (path_cost(g, env, p) != best) continue;
        const bool uses = std::any_of(p.begin(), p.end(), [&](const Step& s) { return s.edge.index == j; });
        every = every && uses;
        some = some || uses;
      }
      const EdgeClassification c = classify_edge(solver, env, EdgeId{j});
      ASSERT_EQ(c.essential, every);
      ASSERT_EQ(c.semi_essential, some);
    }
  }
}

TEST(ClassifyTest, ExhaustiveEventLaws) {
  for (const auto& g : small_instances()) {
    PassageSolver solver(g);
    const Time gap = g.gap();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << g.edge_count()); ++mask) {
      const Environment env = from_mask(g, mask);
      const GeodesicDag dag = geodesic_dag(solver, env);
      for (std::uint32_t jj = 0; jj < g.edge_count(); ++jj) {
        const EdgeId j{jj};
        const Environment lo = sigma(env, j, Level::a);
        const Environment hi = sigma(env, j, Level::b);
        const Time f_lo = solver.passage_time(lo);
        const Time f_hi = solver.passage_time(hi);
        const Time d = f_hi - f_lo;
        ASSERT_GE(d, 0);
        ASSERT_LE(d, gap);
        ASSERT_EQ(first_derivative(solver, env, j), d);

        const EdgeClassification c = classify_edge(solver, env, j);
        const EdgeClassification c_lo = classify_edge(solver, lo, j);
        const EdgeClassification c_hi = classify_edge(solver, hi, j);
        // inclusions
        ASSERT_TRUE(!c.essential || c.semi_essential);
        ASSERT_TRUE(!c.very_influential || c.influential);
        ASSERT_TRUE(!c.essential || c.influential);
        ASSERT_TRUE(!c.very_influential || c.semi_essential);
        // A_j = (sigma_j^a)^{-1}(E_j), Ahat_j = (sigma_j^b)^{-1}(Ehat_j)
        ASSERT_EQ(c.influential, c_lo.essential);
        ASSERT_EQ(c.very_influential, c_hi.semi_essential);
        // on {w_j = a}: A_j and E_j agree; on {w_j = b}: Ahat_j and Ehat_j agree
        if (!env.is_b(j)) ASSERT_EQ(c.influential, c.essential);
        if (env.is_b(j)) ASSERT_EQ(c.very_influential, c.semi_essential);
        // sigma_j^a(A_j) lands in E_j, sigma_j^b(Ahat_j) lands in Ehat_j
        if (c.influential) ASSERT_TRUE(c_lo.essential && c_lo.influential);
        if (c.very_influential) ASSERT_TRUE(c_hi.semi_essential && c_hi.very_influential);
        // the two single-edge laws
        if (!c_lo.essential) ASSERT_EQ(f_hi, f_lo);
        if (c_hi.semi_essential) ASSERT_EQ(f_hi, f_lo + gap);
        // geodesics are unchanged by lowering an essential edge
        if (c.essential) ASSERT_EQ(geodesic_dag(solver, lo).orientation, dag.orientation);
        // flipping a -> b never lowers f
        if (!env.is_b(j)) ASSERT_GE(solver.passage_time(hi), dag.passage_time);
      }
    }
  }
}

TEST(ClassifyTest, OrientationNeverFlipsUnderOneEdgeChange) {
  for (const auto& g : small_instances()) {
    PassageSolver solver(g);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << g.edge_count()); mask += 3) {
      const Environment env = from_mask(g, mask);
      for (std::uint32_t x = 0; x < g.edge_count(); ++x) {
        const GeodesicDag lo = geodesic_dag(solver, sigma(env, EdgeId{x}, Level::a));
        const GeodesicDag hi = geodesic_dag(solver, sigma(env, EdgeId{x}, Level::b));
        for (std::uint32_t k = 0; k < g.edge_count(); ++k) {
          if (lo.orientation[k] == kNone || hi.orientation[k] == kNone) continue;
          const bool flips = (lo.orientation[k] == kForward && hi.orientation[k] == kBackward) ||
                             (lo.orientation[k] == kBackward && hi.orientation[k] == kForward);
          ASSERT_FALSE(flips);
        }
      }
    }
  }
}

TEST(DirectionSwitchTest, AllAHasNoSwitch) {
  const Lattice g = box({{0, 2}, {0, 2}}, 1, 4);
  const Environment env(g.edge_count());
  PassageSolver solver(g);
  for (std::uint32_t k = 0; k < g.edge_count(); ++k) {
    for (std::uint32_t l = 0; l < g.edge_count(); ++l) {
      for (std::uint32_t m = 0; m < g.edge_count(); ++m) {
        if (k == l || l == m || k == m) continue;
        EXPECT_FALSE(detect_direction_switch(solver, env, EdgeId{k}, EdgeId{l}, EdgeId{m}));
      }
    }
  }
}

TEST(DirectionSwitchTest, NeverWhenBBelowThreeA) {
  const Lattice g = box({{0, 2}, {0, 1}}, 1, 2, {0, 1}, {2, 0});
  PassageSolver solver(g);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << g.edge_count()); ++mask) {
    const Environment env = from_mask(g, mask);
    for (std::uint32_t k = 0; k < g.edge_count(); ++k) {
      for (std::uint32_t l = 0; l < g.edge_count(); ++l) {
        for (std::uint32_t m = l + 1; m < g.edge_count(); ++m) {
          if (k == l || k == m) continue;
          ASSERT_FALSE(detect_direction_switch(solver, env, EdgeId{k}, EdgeId{l}, EdgeId{m}));
        }
      }
    }
  }
}

TEST(DirectionSwitchTest, NotSemiEssentialMeansNoSwitch) {
  const Lattice g = box({{0, 3}, {0, 2}}, 1, 4);
  PassageSolver solver(g);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 300; ++t) {
    const Environment env = random_env(g, rng);
    const EdgeSubset s = random_subset(g, 3, rng);
    const EdgeId k = s[0], l = s[1], m = s[2];
    Environment e1 = sigma(sigma(sigma(env, k, Level::a), l, Level::a), m, Level::b);
    Environment e2 = sigma(sigma(sigma(env, k, Level::a), l, Level::b), m, Level::a);
    const bool on1 = geodesic_dag(solver, e1).on_geodesic(k);
    const bool on2 = geodesic_dag(solver, e2).on_geodesic(k);
    if (!on1 || !on2) EXPECT_FALSE(detect_direction_switch(solver, env, k, l, m));
  }
}

TEST(DirectionSwitchTest, RejectsRepeatedEdges) {
  const Lattice g = box({{0, 2}, {0, 1}});
  const Environment env(g.edge_count());
  EXPECT_THROW(detect_direction_switch(g, env, EdgeId{1}, EdgeId{1}, EdgeId{2}), Error);
}
