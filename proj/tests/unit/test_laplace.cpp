#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "gbal/error.hpp"
#include "gbal/log.hpp"
#include "gbal/laplace.hpp"
#include "support/oracles.hpp"

using namespace gbal;

namespace {

LabelState labels_of(int nc, std::initializer_list<std::pair<NodeId, int>> l) {
  LabelState s;
  s.n_classes = nc;
  for (auto [id, c] : l) s.add(id, c);
  return s;
}

LabelState random_labels(std::size_t n, int nc, std::size_t count, std::mt19937_64& rng) {
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  LabelState s;
  s.n_classes = nc;
  for (std::size_t t = 0; t < count; ++t) s.add(ids[t], static_cast<int>(t % nc));
  return s;
}

struct WarningCapture {
  std::vector<std::string> messages;
  WarningHandler previous;
  WarningCapture() {
    previous = set_warning_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { set_warning_handler(previous); }
};

}  // namespace

TEST(Laplace, ThreeNodePathMidpoint) {
  auto g = oracle::path_graph(3);
  auto pred = laplace_learning(g, labels_of(2, {{0, 0}, {2, 1}}));
  EXPECT_NEAR(pred.at(1, 0), 0.5, 1e-10);
  EXPECT_NEAR(pred.at(1, 1), 0.5, 1e-10);
}

TEST(Laplace, FivePathLinearInterpolation) {
  auto g = oracle::path_graph(5);
  auto pred = laplace_learning(g, labels_of(2, {{0, 0}, {4, 1}}));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(pred.at(i, 1), i / 4.0, 1e-10);
}

TEST(Laplace, AllLabeledReturnsOneHot) {
  auto g = oracle::path_graph(3);
  auto pred = laplace_learning(g, labels_of(3, {{0, 2}, {1, 0}, {2, 1}}));
  EXPECT_EQ(std::vector<double>(pred.row(0).begin(), pred.row(0).end()), (std::vector<double>{0, 0, 1}));
  EXPECT_EQ(pred.at(1, 0), 1.0);
  EXPECT_EQ(pred.at(2, 1), 1.0);
}

TEST(Laplace, MatchesDenseSolve) {
  std::mt19937_64 rng(30);
  for (int t = 0; t < 10; ++t) {
    auto g = oracle::random_connected_graph(30, 0.1, rng);
    auto labels = random_labels(30, 3, 5, rng);
    auto pred = laplace_learning(g, labels);
    auto ref = oracle::dense_laplace_solve(g, labels);
    for (std::size_t i = 0; i < 30; ++i)
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(pred.at(i, c), ref(i, c), 1e-6);
  }
}

TEST(Laplace, HarmonicBoundedAndStochastic) {
  std::mt19937_64 rng(31);
  auto g = oracle::random_connected_graph(80, 0.05, rng);
  auto labels = random_labels(80, 4, 8, rng);
  auto pred = laplace_learning(g, labels, LaplaceOptions{1e-10});
  std::vector<char> is_labeled(80, 0);
  for (auto id : labels.ids) is_labeled[id] = 1;
  for (std::size_t i = 0; i < 80; ++i) {
    double sum = 0;
    for (int c = 0; c < 4; ++c) {
      EXPECT_GE(pred.at(i, c), -1e-9);
      EXPECT_LE(pred.at(i, c), 1 + 1e-9);
      sum += pred.at(i, c);
    }
    EXPECT_NEAR(sum, 1.0, 1e-8);
    if (is_labeled[i]) continue;
    for (int c = 0; c < 4; ++c) {
      double acc = 0;
      for (const Edge& e : g.neighbors(i)) acc += e.weight * (pred.at(i, c) - pred.at(e.target, c));
      EXPECT_NEAR(acc, 0.0, 1e-8);
    }
  }
}

TEST(Laplace, PermutationEquivariant) {
  std::mt19937_64 rng(32);
  const std::size_t n = 40;
  auto g = oracle::random_connected_graph(n, 0.1, rng);
  auto labels = random_labels(n, 2, 4, rng);
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::tuple<NodeId, NodeId, double, double>> e;
  for (NodeId i = 0; i < n; ++i)
    for (const Edge& ed : g.neighbors(i))
      if (i < ed.target) e.emplace_back(perm[i], perm[ed.target], ed.weight, ed.length);
  auto pg = SimilarityGraph::from_edges(n, e);
  LabelState pl;
  pl.n_classes = 2;
  for (std::size_t t = 0; t < labels.size(); ++t) pl.add(perm[labels.ids[t]], labels.classes[t]);
  auto a = laplace_learning(g, labels, LaplaceOptions{1e-12});
  auto b = laplace_learning(pg, pl, LaplaceOptions{1e-12});
  for (NodeId i = 0; i < n; ++i) EXPECT_NEAR(a.at(i, 1), b.at(perm[i], 1), 1e-9);
}

TEST(Laplace, UnlabeledComponentGetsUniformScores) {
  std::vector<std::tuple<NodeId, NodeId, double, double>> e{{0, 1, 1.0, 1.0}, {2, 3, 1.0, 1.0}};
  auto g = SimilarityGraph::from_edges(4, e);
  WarningCapture capture;
  SolveStats stats;
  auto pred = laplace_learning(g, labels_of(2, {{0, 1}}), {}, nullptr, &stats);
  EXPECT_EQ(pred.at(1, 1), 1.0);
  EXPECT_EQ(pred.at(2, 0), 0.5);
  EXPECT_EQ(pred.at(3, 1), 0.5);
  EXPECT_EQ(stats.unreachable_nodes, 2u);
  EXPECT_FALSE(capture.messages.empty());
}

TEST(Laplace, WarmStartConvergesToSameSolution) {
  std::mt19937_64 rng(33);
  auto g = oracle::random_connected_graph(60, 0.08, rng);
  auto labels = random_labels(60, 3, 6, rng);
  auto cold = laplace_learning(g, labels, LaplaceOptions{1e-12});
  for (NodeId i = 0; i < 60; ++i)
    if (std::find(labels.ids.begin(), labels.ids.end(), i) == labels.ids.end()) {
      labels.add(i, 1);
      break;
    }
  SolveStats warm_stats, cold_stats;
  auto warm = laplace_learning(g, labels, LaplaceOptions{1e-12}, &cold, &warm_stats);
  auto fresh = laplace_learning(g, labels, LaplaceOptions{1e-12}, nullptr, &cold_stats);
  for (std::size_t i = 0; i < 60; ++i)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(warm.at(i, c), fresh.at(i, c), 1e-9);
}

TEST(Laplace, Errors) {
  auto g = oracle::path_graph(3);
  EXPECT_THROW(laplace_learning(g, labels_of(2, {})), InvalidInput);
  EXPECT_THROW(laplace_learning(g, labels_of(2, {{0, 0}}), LaplaceOptions{0.0}), InvalidParameter);
  EXPECT_THROW(laplace_learning(g, labels_of(2, {{0, 0}, {0, 1}})), InvalidInput);
  EXPECT_THROW(laplace_learning(g, labels_of(2, {{5, 0}})), InvalidInput);
  EXPECT_THROW(laplace_learning(g, labels_of(2, {{0, 2}})), InvalidInput);
}

TEST(Laplace, NonConvergenceReportsResidual) {
  std::mt19937_64 rng(34);
  auto g = oracle::random_connected_graph(200, 0.02, rng);
  try {
    laplace_learning(g, labels_of(2, {{0, 0}, {1, 1}}), LaplaceOptions{1e-14, 1});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.last_residual(), 0.0);
  }
}

TEST(PredictLabels, ArgmaxWithFirstIndexTies) {
  Prediction p(3, 3, {0.2, 0.5, 0.3, 0.4, 0.4, 0.2, 0.1, 0.1, 0.8});
  EXPECT_EQ(predict_labels(p), (std::vector<int>{1, 0, 2}));
}

TEST(PredictLabels, Examples) {
  Prediction p(2, 3, {0.2, 0.7, 0.1, 0.5, 0.5, 0.0});
  EXPECT_EQ(predict_labels(p), (std::vector<int>{1, 0}));
}

TEST(Accuracy, InvertedAndCounting) {
  // 11 nodes, node 10 labeled; 9 of the 10 unlabeled predictions match.
  std::vector<double> s;
  std::vector<int> truth;
  for (int i = 0; i < 11; ++i) {
    s.insert(s.end(), {1.0, 0.0});
    truth.push_back(i == 3 ? 1 : 0);
  }
  Prediction p(11, 2, s);
  EXPECT_DOUBLE_EQ(accuracy(p, truth, labels_of(2, {{10, 0}})), 0.9);
  std::vector<int> inverted(11, 1);
  EXPECT_DOUBLE_EQ(accuracy(p, inverted, labels_of(2, {{10, 1}})), 0.0);
}

TEST(Accuracy, CountsUnlabeledOnly) {
  Prediction p(4, 2, {1, 0, 1, 0, 0, 1, 0, 1});
  std::vector<int> truth{0, 1, 1, 0};
  EXPECT_DOUBLE_EQ(accuracy(p, truth, labels_of(2, {{0, 0}})), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(accuracy(p, truth, labels_of(2, {{1, 1}, {3, 0}})), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(p, truth, labels_of(2, {{0, 0}, {1, 1}, {2, 1}, {3, 0}})), 1.0);
}
