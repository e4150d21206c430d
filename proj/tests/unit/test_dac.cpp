#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gbal/dac.hpp"
#include "gbal/error.hpp"
#include "support/oracles.hpp"

using namespace gbal;

namespace {

SimilarityGraph unit_square_graph(std::size_t n, std::uint64_t seed, std::size_t k = 10) {
  std::mt19937_64 rng(seed);
  return build_graph(knn_search(oracle::unit_square(n, rng), k));
}

void expect_separated_and_covering(const SimilarityGraph& g, const DacResult& res) {
  const std::size_t n = g.n_nodes();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<char> covered(n, 0);
  for (std::size_t a = 0; a < res.core.size(); ++a) {
    auto dist = oracle::bellman_ford(g, res.core[a]);
    const double r = res.trace[a].inner_radius;
    for (std::size_t b = a + 1; b < res.core.size(); ++b)
      if (b >= res.n_initial) EXPECT_GE(dist[res.core[b]], r) << "pair " << a << "," << b;
    for (std::size_t y = 0; y < n; ++y)
      if (dist[y] < r || y == res.core[a]) covered[y] = 1;
  }
  for (std::size_t y = 0; y < n; ++y) EXPECT_TRUE(covered[y]) << "node " << y;
}

}  // namespace

TEST(DijkstraBall, ZeroRadiusIsEmptyPositiveContainsSource) {
  auto g = oracle::path_graph(5);
  EXPECT_TRUE(dijkstra_ball(g, 2, 0.0).empty());
  EXPECT_EQ(dijkstra_ball(g, 2, 1e-9), (std::vector<NodeId>{2}));
  EXPECT_EQ(dijkstra_ball(g, 2, 1.0), (std::vector<NodeId>{2}));
  EXPECT_EQ(dijkstra_ball(g, 2, 1.5), (std::vector<NodeId>{1, 2, 3}));
  EXPECT_THROW(dijkstra_ball(g, 2, -1.0), InvalidParameter);
  EXPECT_THROW(dijkstra_ball(g, 9, 1.0), InvalidInput);
}

TEST(DijkstraBall, MatchesBellmanFord) {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> radius(0.0, 3.0);
  for (int t = 0; t < 25; ++t) {
    auto g = oracle::random_connected_graph(40, 0.08, rng);
    NodeId src = static_cast<NodeId>(rng() % 40);
    auto ref = oracle::bellman_ford(g, src);
    auto sp = shortest_paths(g, src);
    for (std::size_t i = 0; i < 40; ++i) EXPECT_NEAR(sp[i], ref[i], 1e-12);
    double r = radius(rng);
    std::vector<NodeId> expected;
    for (NodeId i = 0; i < 40; ++i)
      if (ref[i] < r) expected.push_back(i);
    EXPECT_EQ(dijkstra_ball(g, src, r), expected);
  }
}

TEST(DensityRadius, PathExamples) {
  auto g = oracle::path_graph(10);
  EXPECT_EQ(density_radius(g, 0, 0.35), 3.0);
  EXPECT_EQ(density_radius(g, 4, 0.35), 2.0);
  EXPECT_EQ(density_radius(g, 4, 0.05), 0.0);
  EXPECT_THROW(density_radius(g, 0, 0.0), InvalidParameter);
  EXPECT_THROW(density_radius(g, 0, 1.0), InvalidParameter);
}

TEST(DensityRadius, ClosedBallHoldsTargetCount) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 20; ++t) {
    auto g = oracle::random_connected_graph(50, 0.1, rng);
    NodeId src = static_cast<NodeId>(rng() % 50);
    double p = 0.05 + 0.04 * t;
    double radius = density_radius(g, src, p);
    auto ref = oracle::bellman_ford(g, src);
    std::size_t within = 0, strictly = 0;
    for (double d : ref) {
      within += d <= radius;
      strictly += d < radius;
    }
    auto target = static_cast<std::size_t>(std::ceil(p * 50 - 1e-9));
    EXPECT_GE(within, target);
    EXPECT_LT(strictly, target);
  }
}

TEST(DensityRadius, SmallComponentEnclosesIt) {
  std::vector<std::tuple<NodeId, NodeId, double, double>> e{{0, 1, 1.0, 0.5}};
  for (NodeId i = 2; i + 1 < 20; ++i) e.emplace_back(i, i + 1, 1.0, 1.0);
  auto g = SimilarityGraph::from_edges(20, e);
  double radius = density_radius(g, 0, 0.5);
  EXPECT_GT(radius, 0.5);
  EXPECT_EQ(dijkstra_ball(g, 0, radius), (std::vector<NodeId>{0, 1}));
}

TEST(Dac, EverythingInitialWithCoveringRadius) {
  auto g = oracle::path_graph(6);
  std::vector<NodeId> all{0, 1, 2, 3, 4, 5};
  auto res = dac(g, all, DacParams{FixedRadii{10.0, 20.0}, 0});
  EXPECT_EQ(res.core, all);
  EXPECT_EQ(res.n_initial, 6u);
}

TEST(Dac, SingleNode) {
  auto g = SimilarityGraph::from_edges(1, {});
  auto res = dac(g, {}, DacParams{FixedRadii{0.1, 0.2}, 3});
  EXPECT_EQ(res.core, (std::vector<NodeId>{0}));
  auto dens = dac(g, {}, DacParams{DensityRadii{0.5}, 3});
  EXPECT_EQ(dens.core, (std::vector<NodeId>{0}));
}

TEST(Dac, InvalidParameters) {
  auto g = oracle::path_graph(3);
  EXPECT_THROW(dac(g, {}, DacParams{FixedRadii{0.0, 1.0}, 0}), InvalidParameter);
  EXPECT_THROW(dac(g, {}, DacParams{FixedRadii{2.0, 1.0}, 0}), InvalidParameter);
  EXPECT_THROW(dac(g, {}, DacParams{DensityRadii{1.5}, 0}), InvalidParameter);
  std::vector<NodeId> bad{7};
  EXPECT_THROW(dac(g, bad, DacParams{FixedRadii{1.0, 2.0}, 0}), InvalidInput);
}

TEST(Dac, UnitSquareFixedRadiiSeparationAndCoverage) {
  auto g = unit_square_graph(200, 42);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto res = dac(g, {}, DacParams{FixedRadii{0.08, 0.16}, seed});
    EXPECT_LE(res.core.size(), 200u);
    expect_separated_and_covering(g, res);
  }
}

TEST(Dac, DensityModeSeparationAndCoverage) {
  auto g = unit_square_graph(300, 43);
  auto res = dac(g, {}, DacParams{DensityRadii{0.05}, 1});
  expect_separated_and_covering(g, res);
  for (const auto& step : res.trace) EXPECT_EQ(step.inner_radius, step.outer_radius / 2.0);
}

TEST(Dac, WithInitialPoints) {
  auto g = unit_square_graph(200, 44);
  std::vector<NodeId> initial{5, 17, 5, 99};
  auto res = dac(g, initial, DacParams{FixedRadii{0.1, 0.2}, 2});
  EXPECT_EQ(res.n_initial, 3u);
  EXPECT_EQ(res.core[0], 5u);
  EXPECT_EQ(res.core[1], 17u);
  EXPECT_EQ(res.core[2], 99u);
  expect_separated_and_covering(g, res);
}

TEST(Dac, DeterministicPerSeed) {
  auto g = unit_square_graph(250, 45);
  DacParams params{DensityRadii{0.05}, 9};
  EXPECT_EQ(dac(g, {}, params).core, dac(g, {}, params).core);
  params.seed = 10;
  auto other = dac(g, {}, params).core;
  EXPECT_FALSE(other.empty());
}

TEST(Dac, SeenSetGrowsMonotonically) {
  auto g = unit_square_graph(200, 46);
  auto res = dac(g, {}, DacParams{FixedRadii{0.05, 0.1}, 3});
  for (std::size_t i = 1; i < res.trace.size(); ++i)
    EXPECT_GT(res.trace[i].seen_size, res.trace[i - 1].seen_size);
  EXPECT_EQ(res.trace.back().seen_size, 200u);
  EXPECT_EQ(res.trace.back().annulus_size, 0u);
  // Draws from a nonempty annulus are never random jumps; the first draw always is.
  EXPECT_TRUE(res.trace.front().random_jump);
}

TEST(Dac, LargerRadiiGiveSmallerCoreSets) {
  auto g = unit_square_graph(400, 47);
  std::size_t fine = 0, coarse = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    fine += dac(g, {}, DacParams{FixedRadii{0.05, 0.1}, s}).core.size();
    coarse += dac(g, {}, DacParams{FixedRadii{0.15, 0.3}, s}).core.size();
  }
  EXPECT_LT(coarse, fine);
}
