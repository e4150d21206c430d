#include "gbal/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gbal/error.hpp"

namespace gbal {

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "checkerboard") return SyntheticKind::checkerboard;
  if (name == "two-moons" || name == "two_moons") return SyntheticKind::two_moons;
  if (name == "gaussian-blobs" || name == "gaussian_blobs" || name == "blobs")
    return SyntheticKind::gaussian_blobs;
  throw InvalidParameter("unknown synthetic dataset kind: " + name);
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::checkerboard: return "checkerboard";
    case SyntheticKind::two_moons: return "two-moons";
    case SyntheticKind::gaussian_blobs: return "gaussian-blobs";
  }
  return "unknown";
}

int checkerboard_class(double x, double y) {
  auto cell = [](double v) { return std::min(3, std::max(0, static_cast<int>(std::floor(4.0 * v)))); };
  return (cell(x) + cell(y)) % 2;
}

FeatureMatrix lift_planar(const FeatureMatrix& coords, double cx, double cy, double height) {
  if (coords.dim() != 2) throw InvalidInput("lift_planar: expected 2-D coordinates");
  if (!(height > 0.0)) throw InvalidParameter("lift_planar: height must be positive");
  std::vector<double> v;
  v.reserve(coords.n_points() * 3);
  for (std::size_t i = 0; i < coords.n_points(); ++i) {
    auto r = coords.row(i);
    v.insert(v.end(), {r[0] - cx, r[1] - cy, height});
  }
  return FeatureMatrix(coords.n_points(), 3, std::move(v));
}

SyntheticData make_synthetic(SyntheticKind kind, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InvalidParameter("make_synthetic: need at least 2 points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> xy;
  xy.reserve(2 * n);
  std::vector<int> labels(n);
  SyntheticData out;
  double cx = 0.0, cy = 0.0, height = 1.0;

  switch (kind) {
    case SyntheticKind::checkerboard:
      if (n < 16) throw InvalidParameter("make_synthetic: checkerboard needs n >= 16");
      for (std::size_t i = 0; i < n; ++i) {
        double x = unit(rng), y = unit(rng);
        xy.insert(xy.end(), {x, y});
        labels[i] = checkerboard_class(x, y);
      }
      out.n_classes = 2;
      cx = cy = 0.5;
      height = 1.0;
      break;
    case SyntheticKind::two_moons:
      for (std::size_t i = 0; i < n; ++i) {
        int cls = static_cast<int>(i % 2);
        double t = std::numbers::pi * unit(rng);
        double x = cls == 0 ? std::cos(t) : 1.0 - std::cos(t);
        double y = cls == 0 ? std::sin(t) : 0.5 - std::sin(t);
        xy.insert(xy.end(), {x + 0.1 * normal(rng), y + 0.1 * normal(rng)});
        labels[i] = cls;
      }
      out.n_classes = 2;
      cx = 0.5;
      cy = 0.25;
      height = 3.0;
      break;
    case SyntheticKind::gaussian_blobs: {
      constexpr double kMeans[4][2] = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
      for (std::size_t i = 0; i < n; ++i) {
        int cls = static_cast<int>(i % 4);
        xy.insert(xy.end(), {kMeans[cls][0] + 0.3 * normal(rng), kMeans[cls][1] + 0.3 * normal(rng)});
        labels[i] = cls;
      }
      out.n_classes = 4;
      cx = cy = 5.0;
      height = 10.0;
      break;
    }
  }
  out.coords = FeatureMatrix(n, 2, std::move(xy));
  out.features = lift_planar(out.coords, cx, cy, height);
  out.labels = std::move(labels);
  return out;
}

}  // namespace gbal
