#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <tuple>
#include <vector>

#include "gbal/features.hpp"

namespace gbal {

using NodeId = std::uint32_t;

// Angle between two nonzero vectors, arccos of the clamped cosine similarity.
// Result lies in [0, pi].
double angular_distance(std::span<const double> x, std::span<const double> y);

enum class KnnMethod {
  exact,   // exhaustive O(N^2 d) scan
  vptree,  // vantage-point tree under the angular metric; returns the exact neighbors
};

// Per node, the k nearest other nodes sorted by (distance, id) ascending.
class KnnIndex {
 public:
  KnnIndex() = default;
  KnnIndex(std::size_t n_nodes, std::size_t k, std::vector<NodeId> ids, std::vector<double> distances);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t k() const noexcept { return k_; }
  std::span<const NodeId> neighbors(std::size_t i) const { return {ids_.data() + i * k_, k_}; }
  std::span<const double> distances(std::size_t i) const { return {dists_.data() + i * k_, k_}; }

 private:
  std::size_t n_nodes_ = 0;
  std::size_t k_ = 0;
  std::vector<NodeId> ids_;
  std::vector<double> dists_;
};

// Throws InvalidParameter unless 1 <= k < n_points.
KnnIndex knn_search(const FeatureMatrix& features, std::size_t k,
                    KnnMethod method = KnnMethod::exact);

// K = 50, or max(2, N/10) for N <= 50; always clipped below N.
std::size_t default_k(std::size_t n_points);

struct Edge {
  NodeId target;
  double weight;  // symmetrized kernel value in (0, 1]
  double length;  // angular distance between the endpoints
};

// Immutable compressed adjacency of a symmetric weighted graph. Each node's
// edges are sorted by target id; no self loops.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  SimilarityGraph(std::size_t n_nodes, std::vector<std::size_t> offsets, std::vector<Edge> edges,
                  std::size_t knn_k = 0);

  // Builds from an undirected edge list (each pair once, either orientation).
  static SimilarityGraph from_edges(std::size_t n_nodes,
                                    const std::vector<std::tuple<NodeId, NodeId, double, double>>& edges,
                                    std::size_t knn_k = 0);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t n_edges() const noexcept { return edges_.size() / 2; }
  std::size_t knn_k() const noexcept { return knn_k_; }
  std::span<const Edge> neighbors(std::size_t i) const {
    return {edges_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t degree_count(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  double weighted_degree(std::size_t i) const;
  // Zero when i and j are not adjacent.
  double weight(NodeId i, NodeId j) const;

  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

 private:
  std::size_t n_nodes_ = 0;
  std::size_t knn_k_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Edge> edges_;
};

struct GraphOptions {
  // Replaces sigma_i when the K-th neighbor coincides with node i.
  double sigma_floor = 1e-8;
};

// Gaussian kernel W_ij = exp(-d_ij^2 / (sigma_i sigma_j)), sigma_i = sqrt(d(i, i_K)),
// restricted to KNN pairs and symmetrized as (W + W^T) / 2.
SimilarityGraph build_graph(const KnnIndex& index, const GraphOptions& options = {});

struct ComponentLabels {
  std::vector<std::uint32_t> component;  // per node
  std::size_t count = 0;
};

ComponentLabels connected_components(const SimilarityGraph& graph);

// Binary layout, all little-endian:
//   "GBAG" | u32 version (=1) | u64 n_nodes | u64 knn_k | u64 n_directed_edges
//   | (n_nodes + 1) x u64 offsets | n_directed_edges x (u32 target, f64 weight, f64 length)
inline constexpr char kGraphMagic[4] = {'G', 'B', 'A', 'G'};
inline constexpr std::uint32_t kGraphVersion = 1;

void write_graph(const std::filesystem::path& path, const SimilarityGraph& graph);
SimilarityGraph read_graph(const std::filesystem::path& path);

}  // namespace gbal
