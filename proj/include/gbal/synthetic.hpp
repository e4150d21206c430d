#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gbal/features.hpp"

namespace gbal {

enum class SyntheticKind { checkerboard, two_moons, gaussian_blobs };

SyntheticKind parse_synthetic_kind(const std::string& name);
std::string to_string(SyntheticKind kind);

struct SyntheticData {
  FeatureMatrix coords;    // raw planar samples, N x 2
  FeatureMatrix features;  // planar samples lifted for the angular metric, N x 3
  std::vector<int> labels;
  int n_classes = 0;
};

// Class of a unit-square point under the 4 x 4 alternating grid.
int checkerboard_class(double x, double y);

// Maps planar points to (x - cx, y - cy, height). Under angular distance the
// lifted points keep their planar neighborhoods, which raw 2-D coordinates
// would not (every ray from the origin collapses to one direction).
FeatureMatrix lift_planar(const FeatureMatrix& coords, double cx, double cy, double height);

// checkerboard: uniform unit-square points, 2 classes by cell parity (n >= 16).
// two_moons: interleaved half circles with Gaussian noise 0.1, 2 classes.
// gaussian_blobs: 4 isotropic blobs (sd 0.3) at the corners of a 10 x 10 square.
SyntheticData make_synthetic(SyntheticKind kind, std::size_t n, std::uint64_t seed);

}  // namespace gbal
