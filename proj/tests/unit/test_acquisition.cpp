#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "gbal/acquisition.hpp"
#include "gbal/error.hpp"
#include "support/oracles.hpp"

using namespace gbal;

namespace {

std::vector<NodeId> all_nodes(std::size_t n) {
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

Prediction random_prediction(std::size_t n, int nc, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(n * nc);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0;
    for (int c = 0; c < nc; ++c) sum += s[i * nc + c] = u(rng);
    for (int c = 0; c < nc; ++c) s[i * nc + c] /= sum;
  }
  return Prediction(n, nc, std::move(s));
}

}  // namespace

TEST(Uncertainty, Examples) {
  Prediction p(3, 3, {1, 0, 0, 0.5, 0.5, 0, 0.5, 0.2, 0.3});
  auto acq = uncertainty(p, all_nodes(3));
  EXPECT_DOUBLE_EQ(acq.values()[0], 0.0);
  EXPECT_DOUBLE_EQ(acq.values()[1], 1.0);
  EXPECT_DOUBLE_EQ(acq.values()[2], 0.8);
}

TEST(Uncertainty, ThreeClassExample) {
  Prediction p(1, 3, {0.6, 0.3, 0.1});
  EXPECT_NEAR(uncertainty(p, all_nodes(1)).values()[0], 0.7, 1e-15);
}

TEST(Uncertainty, CandidatesSortedAndDeduplicated) {
  Prediction p(4, 2, {1, 0, 0.5, 0.5, 0.6, 0.4, 0.9, 0.1});
  std::vector<NodeId> c{3, 1, 3};
  auto acq = uncertainty(p, c);
  ASSERT_EQ(acq.size(), 2u);
  EXPECT_EQ(acq.ids()[0], 1u);
  EXPECT_EQ(acq.ids()[1], 3u);
  auto ext = acq.extended(4);
  EXPECT_EQ(ext[0], 0.0);
  EXPECT_DOUBLE_EQ(ext[3], 0.2);
}

TEST(Uncertainty, RequiresTwoClasses) {
  Prediction p(2, 1, {1, 1});
  EXPECT_THROW(uncertainty(p, all_nodes(2)), InvalidInput);
}

TEST(AcquisitionVector, RejectsNegativesAndUnsorted) {
  EXPECT_THROW(AcquisitionVector({0, 1}, {0.1, -0.1}), InvalidInput);
  EXPECT_THROW(AcquisitionVector({1, 0}, {0.1, 0.1}), InvalidInput);
}

TEST(Spectral, ThreePathEigenvalues) {
  auto cache = spectral_decompose(oracle::path_graph(3), SpectralOptions{3});
  ASSERT_EQ(cache.m(), 3u);
  EXPECT_NEAR(cache.eigenvalues[0], 0.0, 1e-12);
  EXPECT_NEAR(cache.eigenvalues[1], 1.0, 1e-12);
  EXPECT_NEAR(cache.eigenvalues[2], 3.0, 1e-12);
}

TEST(Spectral, ConnectedGraphNullVectorIsConstant) {
  std::mt19937_64 rng(1);
  auto g = oracle::random_connected_graph(40, 0.1, rng);
  auto cache = spectral_decompose(g, SpectralOptions{5});
  Eigen::VectorXd v0 = cache.eigenvectors.col(0);
  EXPECT_NEAR(cache.eigenvalues[0], 0.0, 1e-10);
  EXPECT_NEAR(std::abs(v0.sum()), std::sqrt(40.0), 1e-8);
  EXPECT_NEAR(v0.maxCoeff() - v0.minCoeff(), 0.0, 1e-8);
}

TEST(Spectral, DenseMatchesDirectEigensolve) {
  std::mt19937_64 rng(2);
  auto g = oracle::random_connected_graph(60, 0.1, rng);
  SpectralOptions opts;
  opts.m = 20;
  opts.method = EigenMethod::dense;
  auto cache = spectral_decompose(g, opts);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::dense_laplacian_of(g));
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(cache.eigenvalues[i], std::max(0.0, es.eigenvalues()[i]), 1e-10);
  Eigen::MatrixXd gram = cache.eigenvectors.transpose() * cache.eigenvectors;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(20, 20)).norm(), 1e-10);
}

TEST(Spectral, LanczosMatchesDense) {
  std::mt19937_64 rng(3);
  auto g = oracle::random_connected_graph(300, 0.02, rng);
  SpectralOptions dense_opts{12}, lanczos_opts{12};
  dense_opts.method = EigenMethod::dense;
  lanczos_opts.method = EigenMethod::lanczos;
  lanczos_opts.seed = 99;
  auto a = spectral_decompose(g, dense_opts);
  auto b = spectral_decompose(g, lanczos_opts);
  for (int i = 0; i < 12; ++i) EXPECT_NEAR(a.eigenvalues[i], b.eigenvalues[i], 1e-7);
  Eigen::MatrixXd lap = oracle::dense_laplacian_of(g);
  for (int i = 0; i < 12; ++i) {
    Eigen::VectorXd v = b.eigenvectors.col(i);
    EXPECT_NEAR(v.norm(), 1.0, 1e-9);
    EXPECT_LT((lap * v - b.eigenvalues[i] * v).norm(), 1e-6);
  }
  // Covariance derived quantities are basis-independent for separated spectra.
  for (NodeId k : {0u, 17u, 150u}) EXPECT_NEAR(a.covariance_diag(k), b.covariance_diag(k), 1e-6);
}

namespace {

struct DenseCovariance {
  Eigen::MatrixXd c;
  DenseCovariance(const SimilarityGraph& g, double tau) {
    Eigen::MatrixXd lap = oracle::dense_laplacian_of(g);
    const auto n = lap.rows();
    c = (lap + tau * Eigen::MatrixXd::Identity(n, n)).inverse();
  }
};

}  // namespace

TEST(Acquisition, FullSpectrumMatchesExplicitCovariance) {
  std::mt19937_64 rng(4);
  const std::size_t n = 15;
  auto g = oracle::random_connected_graph(n, 0.2, rng);
  SpectralOptions opts{n};
  opts.method = EigenMethod::dense;
  auto cache = spectral_decompose(g, opts);
  DenseCovariance ref(g, opts.tau);
  auto pred = random_prediction(n, 3, rng);
  auto nodes = all_nodes(n);
  auto v = vopt(cache, nodes), mc = model_change(cache, pred, nodes), mv = mc_vopt(cache, pred, nodes);
  for (std::size_t k = 0; k < n; ++k) {
    double ckk = ref.c(k, k), col = ref.c.col(k).norm();
    int best = 0;
    for (int c = 1; c < 3; ++c)
      if (pred.at(k, c) > pred.at(k, best)) best = c;
    double resid = 0;
    for (int c = 0; c < 3; ++c) resid += std::pow((c == best ? 1.0 : 0.0) - pred.at(k, c), 2);
    resid = std::sqrt(resid);
    EXPECT_NEAR(cache.covariance_diag(k), ckk, 1e-10);
    EXPECT_NEAR(v.values()[k], col * col / (opts.gamma2 + ckk), 1e-9);
    EXPECT_NEAR(mc.values()[k], col / (opts.gamma2 + ckk) * resid, 1e-9);
    EXPECT_NEAR(mv.values()[k], col * col / (opts.gamma2 + ckk) * resid, 1e-9);
  }
}

TEST(Acquisition, VoptIsUniformOnCycle) {
  auto g = oracle::cycle_graph(12);
  SpectralOptions opts{12};
  auto cache = spectral_decompose(g, opts);
  auto v = vopt(cache, all_nodes(12));
  for (std::size_t k = 1; k < 12; ++k) EXPECT_NEAR(v.values()[k], v.values()[0], 1e-10);
}

TEST(Acquisition, ModelChangeVanishesOnConfidentRows) {
  auto g = oracle::path_graph(4);
  auto cache = spectral_decompose(g, SpectralOptions{4});
  Prediction p(4, 2, {1, 0, 0, 1, 0.5, 0.5, 1, 0});
  auto mc = model_change(cache, p, all_nodes(4));
  EXPECT_EQ(mc.values()[0], 0.0);
  EXPECT_EQ(mc.values()[1], 0.0);
  EXPECT_GT(mc.values()[2], 0.0);
  EXPECT_EQ(mc_vopt(cache, p, all_nodes(4)).values()[3], 0.0);
}
