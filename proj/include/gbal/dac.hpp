#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "gbal/knn_graph.hpp"

namespace gbal {

// Nodes strictly closer than `radius` to `source` in shortest-path distance,
// with edge length equal to the stored angular distance. Ascending ids.
std::vector<NodeId> dijkstra_ball(const SimilarityGraph& graph, NodeId source, double radius);

// Shortest-path distances from `source`; unreachable nodes get +infinity.
std::vector<double> shortest_paths(const SimilarityGraph& graph, NodeId source);

// Smallest R with at least ceil(p N) nodes at distance <= R from `source`.
// When the source's component is too small, returns the component's
// eccentricity nudged up by one ulp so that B_R encloses the component.
double density_radius(const SimilarityGraph& graph, NodeId source, double fraction);

struct FixedRadii {
  double inner;  // r
  double outer;  // R
};

// R from density_radius per selected point, r = R / 2.
struct DensityRadii {
  double fraction = 0.05;
};

struct DacParams {
  std::variant<FixedRadii, DensityRadii> radii = DensityRadii{};
  std::uint64_t seed = 0;

  void validate() const;
};

struct DacStep {
  NodeId node;
  bool from_initial;
  bool random_jump;  // annulus was empty when the node was drawn
  double inner_radius;
  double outer_radius;
  std::size_t seen_size;     // |S| after the update
  std::size_t annulus_size;  // |C| after the update
};

struct DacResult {
  std::vector<NodeId> core;  // initial points first, then selections in order
  std::size_t n_initial = 0;
  std::vector<DacStep> trace;
};

// Dijkstra's annulus core-set. Repeatedly draws a node uniformly from the
// annulus C (or from the unseen nodes when C is empty), then updates
// S <- S u B_r(x) and C <- (C u B_R(x)) \ S until S covers every node.
DacResult dac(const SimilarityGraph& graph, std::span<const NodeId> initial, const DacParams& params);

}  // namespace gbal
