#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gbal/knn_graph.hpp"
#include "gbal/laplace.hpp"

namespace gbal {

// Nonnegative scores over a candidate set; ids strictly ascending.
class AcquisitionVector {
 public:
  AcquisitionVector() = default;
  AcquisitionVector(std::vector<NodeId> ids, std::vector<double> values);

  std::span<const NodeId> ids() const noexcept { return ids_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  // Dense length-n vector, zero outside the candidate set.
  std::vector<double> extended(std::size_t n_nodes) const;

 private:
  std::vector<NodeId> ids_;
  std::vector<double> values_;
};

// Sorted, de-duplicated copy of a candidate list.
std::vector<NodeId> normalize_candidates(std::span<const NodeId> candidates);

// 1 - (s1 - s2) for the two largest scores of each candidate row, clamped to [0, 1].
AcquisitionVector uncertainty(const Prediction& pred, std::span<const NodeId> candidates);

enum class EigenMethod { automatic, dense, lanczos };

struct SpectralOptions {
  std::size_t m = 0;  // 0 selects min(N, 50)
  double tau = 0.1;
  double gamma2 = 0.01;
  std::uint64_t seed = 0;
  EigenMethod method = EigenMethod::automatic;
};

// Lowest eigenpairs of L = D - W and the implied covariance surrogate
// C = V diag(1 / (lambda + tau)) V^T, which is never formed explicitly.
struct SpectralCache {
  Eigen::VectorXd eigenvalues;   // ascending, clamped at 0
  Eigen::MatrixXd eigenvectors;  // N x m, orthonormal columns
  double tau = 0.1;
  double gamma2 = 0.01;

  std::size_t m() const { return static_cast<std::size_t>(eigenvalues.size()); }
  double covariance_diag(NodeId k) const;         // C_kk
  double covariance_column_norm2(NodeId k) const;  // ||C e_k||^2
};

SpectralCache spectral_decompose(const SimilarityGraph& graph, const SpectralOptions& options = {});

// ||C e_k||^2 / (gamma2 + C_kk)
AcquisitionVector vopt(const SpectralCache& cache, std::span<const NodeId> candidates);

// ||C e_k|| / (gamma2 + C_kk) * ||onehot(argmax u_k) - u_k||
AcquisitionVector model_change(const SpectralCache& cache, const Prediction& pred,
                               std::span<const NodeId> candidates);

// ||C e_k||^2 / (gamma2 + C_kk) * ||onehot(argmax u_k) - u_k||
AcquisitionVector mc_vopt(const SpectralCache& cache, const Prediction& pred,
                          std::span<const NodeId> candidates);

void write_acquisition_csv(const std::filesystem::path& path, const AcquisitionVector& acq);

}  // namespace gbal
