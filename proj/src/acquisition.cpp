#include "gbal/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Sparse>

#include "gbal/error.hpp"

namespace gbal {
namespace {

double model_change_norm(const Prediction& pred, NodeId k) {
  auto row = pred.row(k);
  auto top = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  double s = 0.0;
  for (std::size_t c = 0; c < row.size(); ++c) {
    double diff = (c == top ? 1.0 : 0.0) - row[c];
    s += diff * diff;
  }
  return std::sqrt(s);
}

Eigen::MatrixXd dense_laplacian(const SimilarityGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.n_nodes());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (const Edge& e : g.neighbors(i)) {
      lap(i, e.target) -= e.weight;
      lap(i, i) += e.weight;
    }
  return lap;
}

void apply_laplacian(const SimilarityGraph& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                     Eigen::Ref<Eigen::VectorXd> y) {
  for (std::size_t i = 0; i < g.n_nodes(); ++i) {
    double acc = 0.0;
    for (const Edge& e : g.neighbors(i)) acc += e.weight * (x[i] - x[e.target]);
    y[i] = acc;
  }
}

// Orthogonalizes v against the first `count` columns of basis (two passes).
double orthogonalize(const Eigen::MatrixXd& basis, Eigen::Index count, Eigen::VectorXd& v) {
  for (int pass = 0; pass < 2; ++pass)
    if (count > 0) v -= basis.leftCols(count) * (basis.leftCols(count).transpose() * v);
  return v.norm();
}

// Thick-restart Lanczos with full reorthogonalization on the shift-inverted
// operator (L + delta I)^-1, whose dominant eigenpairs are the smallest ones of
// L. Convergence is judged on the residual against L itself.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> lanczos_smallest(const SimilarityGraph& g, Eigen::Index m,
                                                             std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(g.n_nodes());
  const Eigen::Index ncv = std::min(n, std::max<Eigen::Index>(2 * m + 1, m + 30));
  double scale = 0.0;
  for (std::size_t i = 0; i < g.n_nodes(); ++i) scale = std::max(scale, 2.0 * g.weighted_degree(i));
  scale = std::max(scale, 1.0);
  const double tol = 1e-9 * scale;
  const double delta = 1e-6 * scale;

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(g.edges().size() + g.n_nodes());
  for (std::size_t i = 0; i < g.n_nodes(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    entries.emplace_back(row, row, g.weighted_degree(i) + delta);
    for (const Edge& e : g.neighbors(i)) entries.emplace_back(row, static_cast<Eigen::Index>(e.target), -e.weight);
  }
  Eigen::SparseMatrix<double> shifted(n, n);
  shifted.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(shifted);
  if (factor.info() != Eigen::Success)
    throw ConvergenceError("spectral_decompose: factorization of the shifted Laplacian failed", 0.0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto random_vector = [&] {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
  };

  Eigen::MatrixXd basis(n, ncv), images(n, ncv);
  Eigen::Index kept = 0;
  Eigen::VectorXd next = random_vector();
  Eigen::VectorXd lv(n);
  double worst = std::numeric_limits<double>::infinity();
  constexpr int kMaxRestarts = 300;
  for (int restart = 0; restart < kMaxRestarts; ++restart) {
    for (Eigen::Index j = kept; j < ncv; ++j) {
      double nrm = orthogonalize(basis, j, next);
      while (nrm < 1e-10) {  // invariant subspace reached; inject a fresh direction
        next = random_vector();
        nrm = orthogonalize(basis, j, next);
      }
      basis.col(j) = next / nrm;
      images.col(j) = factor.solve(basis.col(j));
      next = images.col(j);
    }
    Eigen::MatrixXd h = basis.transpose() * images;
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(h);
    // Dominant Ritz pairs first.
    Eigen::MatrixXd s = small.eigenvectors().rowwise().reverse();
    Eigen::VectorXd mu = small.eigenvalues().reverse();

    Eigen::Index keep = std::min<Eigen::Index>(ncv - 1, m + (ncv - m) / 2);
    if (ncv == n) keep = ncv;  // the basis spans everything; Ritz pairs are exact
    Eigen::MatrixXd ritz = basis * s.leftCols(keep);
    Eigen::VectorXd lambda(m);
    worst = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      lambda[i] = 1.0 / mu[i] - delta;
      apply_laplacian(g, ritz.col(i), lv);
      worst = std::max(worst, (lv - lambda[i] * ritz.col(i)).norm());
    }
    if (worst <= tol || ncv == n) return {lambda, ritz.leftCols(m)};
    // Continue from the Krylov residual, free of the discarded Ritz directions.
    next = images.col(ncv - 1) - basis * (basis.transpose() * images.col(ncv - 1));
    basis.leftCols(keep) = ritz;
    images.leftCols(keep) = images * s.leftCols(keep);
    kept = keep;
  }
  throw ConvergenceError("spectral_decompose: Lanczos did not converge", worst);
}

}  // namespace

AcquisitionVector::AcquisitionVector(std::vector<NodeId> ids, std::vector<double> values)
    : ids_(std::move(ids)), values_(std::move(values)) {
  if (ids_.size() != values_.size()) throw InvalidInput("AcquisitionVector: length mismatch");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (i > 0 && ids_[i] <= ids_[i - 1]) throw InvalidInput("AcquisitionVector: ids not ascending");
    if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
      throw InvalidInput("AcquisitionVector: values must be finite and nonnegative");
  }
}

std::vector<double> AcquisitionVector::extended(std::size_t n_nodes) const {
  std::vector<double> out(n_nodes, 0.0);
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] >= n_nodes) throw InvalidInput("AcquisitionVector: id exceeds node count");
    out[ids_[i]] = values_[i];
  }
  return out;
}

std::vector<NodeId> normalize_candidates(std::span<const NodeId> candidates) {
  std::vector<NodeId> ids(candidates.begin(), candidates.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

AcquisitionVector uncertainty(const Prediction& pred, std::span<const NodeId> candidates) {
  if (pred.n_classes() < 2) throw InvalidInput("uncertainty: need at least two classes");
  auto ids = normalize_candidates(candidates);
  std::vector<double> values(ids.size());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] >= pred.n_nodes()) throw InvalidInput("uncertainty: candidate out of range");
    auto row = pred.row(ids[t]);
    double s1 = -std::numeric_limits<double>::infinity(), s2 = s1;
    for (double v : row) {
      if (v > s1) {
        s2 = s1;
        s1 = v;
      } else if (v > s2) {
        s2 = v;
      }
    }
    values[t] = std::clamp(1.0 - (s1 - s2), 0.0, 1.0);
  }
  return AcquisitionVector(std::move(ids), std::move(values));
}

double SpectralCache::covariance_diag(NodeId k) const {
  double s = 0.0;
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
    double v = eigenvectors(k, j);
    s += v * v / (eigenvalues[j] + tau);
  }
  return s;
}

double SpectralCache::covariance_column_norm2(NodeId k) const {
  double s = 0.0;
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
    double v = eigenvectors(k, j) / (eigenvalues[j] + tau);
    s += v * v;
  }
  return s;
}

SpectralCache spectral_decompose(const SimilarityGraph& graph, const SpectralOptions& options) {
  const std::size_t n = graph.n_nodes();
  const std::size_t m = options.m ? options.m : std::min<std::size_t>(n, 50);
  if (m < 1 || m > n) throw InvalidParameter("spectral_decompose: need 1 <= m <= N");
  if (!(options.tau > 0.0) || !(options.gamma2 > 0.0))
    throw InvalidParameter("spectral_decompose: tau and gamma2 must be positive");

  bool dense = options.method == EigenMethod::dense ||
               (options.method == EigenMethod::automatic && (n <= 400 || 2 * m >= n));
  SpectralCache cache;
  cache.tau = options.tau;
  cache.gamma2 = options.gamma2;
  const auto mm = static_cast<Eigen::Index>(m);
  if (dense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_laplacian(graph));
    if (solver.info() != Eigen::Success)
      throw ConvergenceError("spectral_decompose: dense eigensolver failed", 0.0);
    cache.eigenvalues = solver.eigenvalues().head(mm);
    cache.eigenvectors = solver.eigenvectors().leftCols(mm);
  } else {
    auto [vals, vecs] = lanczos_smallest(graph, mm, options.seed);
    cache.eigenvalues = std::move(vals);
    cache.eigenvectors = std::move(vecs);
  }
  cache.eigenvalues = cache.eigenvalues.cwiseMax(0.0);
  return cache;
}

AcquisitionVector vopt(const SpectralCache& cache, std::span<const NodeId> candidates) {
  auto ids = normalize_candidates(candidates);
  std::vector<double> values(ids.size());
  for (std::size_t t = 0; t < ids.size(); ++t)
    values[t] = cache.covariance_column_norm2(ids[t]) / (cache.gamma2 + cache.covariance_diag(ids[t]));
  return AcquisitionVector(std::move(ids), std::move(values));
}

AcquisitionVector model_change(const SpectralCache& cache, const Prediction& pred,
                               std::span<const NodeId> candidates) {
  auto ids = normalize_candidates(candidates);
  std::vector<double> values(ids.size());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    NodeId k = ids[t];
    values[t] = std::sqrt(cache.covariance_column_norm2(k)) / (cache.gamma2 + cache.covariance_diag(k)) *
                model_change_norm(pred, k);
  }
  return AcquisitionVector(std::move(ids), std::move(values));
}

AcquisitionVector mc_vopt(const SpectralCache& cache, const Prediction& pred,
                          std::span<const NodeId> candidates) {
  auto ids = normalize_candidates(candidates);
  std::vector<double> values(ids.size());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    NodeId k = ids[t];
    values[t] = cache.covariance_column_norm2(k) / (cache.gamma2 + cache.covariance_diag(k)) *
                model_change_norm(pred, k);
  }
  return AcquisitionVector(std::move(ids), std::move(values));
}

void write_acquisition_csv(const std::filesystem::path& path, const AcquisitionVector& acq) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out.precision(17);
  out << "node,value\n";
  for (std::size_t i = 0; i < acq.size(); ++i) out << acq.ids()[i] << ',' << acq.values()[i] << '\n';
}

}  // namespace gbal
