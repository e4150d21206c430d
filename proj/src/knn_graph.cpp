#include "gbal/knn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <string>

#include "gbal/binary_io.hpp"
#include "gbal/error.hpp"

namespace gbal {
namespace {

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// Both angular_distance and the neighbor search route through here so that
// a pair's distance is bit-identical no matter which path computed it.
// Takes squared norms: sqrt(xx * xx) == xx exactly, so identical directions
// give exactly 0 instead of acos(1 - ulp).
double angle(std::span<const double> x, std::span<const double> y, double xx, double yy) {
  double p = xx * yy;
  double c = dot(x, y) / (std::isfinite(p) ? std::sqrt(p) : std::sqrt(xx) * std::sqrt(yy));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

struct Candidate {
  double dist;
  NodeId id;
  bool operator<(const Candidate& o) const {
    return dist < o.dist || (dist == o.dist && id < o.id);
  }
};

// Bounded max-heap holding the k best (dist, id) candidates.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  void offer(Candidate c) {
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (c < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }
  double worst() const {
    return heap_.size() < k_ ? std::numeric_limits<double>::infinity() : heap_.front().dist;
  }
  std::vector<Candidate> sorted() {
    std::sort_heap(heap_.begin(), heap_.end());
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;
};

class VpTree {
 public:
  VpTree(const FeatureMatrix& f, const std::vector<double>& norms) : f_(f), norms_(norms) {
    std::vector<NodeId> items(f.n_points());
    std::iota(items.begin(), items.end(), NodeId{0});
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    nodes_.reserve(f.n_points());
    root_ = build(items, 0, items.size(), rng);
  }

  void search(NodeId query, TopK& best) const { search(root_, query, best); }

 private:
  static constexpr std::size_t kLeafSize = 8;
  // Absorbs arccos round-off so pruning never drops a true neighbor.
  static constexpr double kSlack = 1e-7;

  struct Node {
    NodeId vantage = 0;
    double radius = 0.0;
    int inside = -1;
    int outside = -1;
    std::vector<NodeId> bucket;  // leaf contents when non-empty
  };

  double dist(NodeId a, NodeId b) const { return angle(f_.row(a), f_.row(b), norms_[a], norms_[b]); }

  int build(std::vector<NodeId>& items, std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
    if (lo >= hi) return -1;
    int idx = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (hi - lo <= kLeafSize) {
      nodes_[idx].bucket.assign(items.begin() + lo, items.begin() + hi);
      return idx;
    }
    std::uniform_int_distribution<std::size_t> pick(lo, hi - 1);
    std::swap(items[lo], items[pick(rng)]);
    NodeId v = items[lo];
    std::vector<std::pair<double, NodeId>> rest;
    rest.reserve(hi - lo - 1);
    for (std::size_t i = lo + 1; i < hi; ++i) rest.emplace_back(dist(v, items[i]), items[i]);
    std::size_t mid = rest.size() / 2;
    std::nth_element(rest.begin(), rest.begin() + mid, rest.end());
    for (std::size_t i = 0; i < rest.size(); ++i) items[lo + 1 + i] = rest[i].second;
    double radius = rest[mid].first;
    int inside = build(items, lo + 1, lo + 1 + mid, rng);
    int outside = build(items, lo + 1 + mid, hi, rng);
    nodes_[idx].vantage = v;
    nodes_[idx].radius = radius;
    nodes_[idx].inside = inside;
    nodes_[idx].outside = outside;
    return idx;
  }

  void search(int idx, NodeId q, TopK& best) const {
    if (idx < 0) return;
    const Node& n = nodes_[idx];
    if (!n.bucket.empty()) {
      for (NodeId p : n.bucket)
        if (p != q) best.offer({dist(q, p), p});
      return;
    }
    double d = dist(q, n.vantage);
    if (n.vantage != q) best.offer({d, n.vantage});
    // inside holds d(v,p) <= radius, outside holds d(v,p) >= radius.
    auto visit_inside = [&] {
      if (d - n.radius <= best.worst() + kSlack) search(n.inside, q, best);
    };
    auto visit_outside = [&] {
      if (n.radius - d <= best.worst() + kSlack) search(n.outside, q, best);
    };
    if (d < n.radius) {
      visit_inside();
      visit_outside();
    } else {
      visit_outside();
      visit_inside();
    }
  }

  const FeatureMatrix& f_;
  const std::vector<double>& norms_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace

double angular_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("angular_distance: dimension mismatch");
  double nx = squared_norm(x), ny = squared_norm(y);
  if (!(nx > 0.0) || !(ny > 0.0)) throw InvalidInput("angular_distance: zero-norm vector");
  return angle(x, y, nx, ny);
}

KnnIndex::KnnIndex(std::size_t n_nodes, std::size_t k, std::vector<NodeId> ids,
                   std::vector<double> dists)
    : n_nodes_(n_nodes), k_(k), ids_(std::move(ids)), dists_(std::move(dists)) {
  if (ids_.size() != n_nodes_ * k_ || dists_.size() != n_nodes_ * k_)
    throw InvalidInput("KnnIndex: storage size does not match n_nodes*k");
  for (std::size_t i = 0; i < n_nodes_; ++i) {
    auto d = distances(i);
    auto nb = neighbors(i);
    for (std::size_t j = 0; j < k_; ++j) {
      if (nb[j] >= n_nodes_ || nb[j] == i) throw InvalidInput("KnnIndex: invalid neighbor id");
      if (!(d[j] >= 0.0 && d[j] <= M_PI)) throw InvalidInput("KnnIndex: distance outside [0, pi]");
      if (j > 0 && d[j] < d[j - 1]) throw InvalidInput("KnnIndex: distances not sorted");
    }
  }
}

std::size_t default_k(std::size_t n_points) {
  std::size_t k = n_points <= 50 ? std::max<std::size_t>(2, n_points / 10) : 50;
  if (n_points >= 2) k = std::min(k, n_points - 1);
  return k;
}

KnnIndex knn_search(const FeatureMatrix& features, std::size_t k, KnnMethod method) {
  const std::size_t n = features.n_points();
  if (k == 0 || k >= n)
    throw InvalidParameter("knn_search: need 1 <= k < n_points (k=" + std::to_string(k) +
                           ", n=" + std::to_string(n) + ")");
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = squared_norm(features.row(i));

  std::vector<NodeId> ids(n * k);
  std::vector<double> dists(n * k);
  auto store = [&](std::size_t i, std::vector<Candidate> best) {
    for (std::size_t j = 0; j < k; ++j) {
      ids[i * k + j] = best[j].id;
      dists[i * k + j] = best[j].dist;
    }
  };

  if (method == KnnMethod::exact) {
    for (std::size_t i = 0; i < n; ++i) {
      TopK best(k);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        best.offer({angle(features.row(i), features.row(j), norms[i], norms[j]), static_cast<NodeId>(j)});
      }
      store(i, best.sorted());
    }
  } else {
    VpTree tree(features, norms);
    for (std::size_t i = 0; i < n; ++i) {
      TopK best(k);
      tree.search(static_cast<NodeId>(i), best);
      store(i, best.sorted());
    }
  }
  return KnnIndex(n, k, std::move(ids), std::move(dists));
}

SimilarityGraph::SimilarityGraph(std::size_t n_nodes, std::vector<std::size_t> offsets,
                                 std::vector<Edge> edges, std::size_t knn_k)
    : n_nodes_(n_nodes), knn_k_(knn_k), offsets_(std::move(offsets)), edges_(std::move(edges)) {
  if (offsets_.size() != n_nodes_ + 1 || offsets_.front() != 0 || offsets_.back() != edges_.size())
    throw InvalidInput("SimilarityGraph: malformed offsets");
  for (std::size_t i = 0; i < n_nodes_; ++i) {
    if (offsets_[i] > offsets_[i + 1]) throw InvalidInput("SimilarityGraph: offsets not monotone");
    auto nb = neighbors(i);
    for (std::size_t e = 0; e < nb.size(); ++e) {
      if (nb[e].target >= n_nodes_ || nb[e].target == i)
        throw InvalidInput("SimilarityGraph: bad edge target");
      if (!(nb[e].weight > 0.0 && nb[e].weight <= 1.0))
        throw InvalidInput("SimilarityGraph: weight outside (0, 1]");
      if (!(nb[e].length >= 0.0)) throw InvalidInput("SimilarityGraph: negative edge length");
      if (e > 0 && nb[e].target <= nb[e - 1].target)
        throw InvalidInput("SimilarityGraph: adjacency not sorted/unique");
    }
  }
  for (std::size_t i = 0; i < n_nodes_; ++i)
    for (const Edge& e : neighbors(i)) {
      auto back = neighbors(e.target);
      auto it = std::lower_bound(back.begin(), back.end(), i,
                                 [](const Edge& x, std::size_t t) { return x.target < t; });
      if (it == back.end() || it->target != i || it->weight != e.weight || it->length != e.length)
        throw InvalidInput("SimilarityGraph: adjacency not symmetric");
    }
}

SimilarityGraph SimilarityGraph::from_edges(
    std::size_t n_nodes, const std::vector<std::tuple<NodeId, NodeId, double, double>>& list,
    std::size_t knn_k) {
  std::vector<std::vector<Edge>> adj(n_nodes);
  for (auto [a, b, w, len] : list) {
    if (a >= n_nodes || b >= n_nodes) throw InvalidInput("from_edges: node id out of range");
    adj[a].push_back({b, w, len});
    adj[b].push_back({a, w, len});
  }
  std::vector<std::size_t> offsets{0};
  std::vector<Edge> edges;
  for (auto& row : adj) {
    std::sort(row.begin(), row.end(), [](const Edge& x, const Edge& y) { return x.target < y.target; });
    edges.insert(edges.end(), row.begin(), row.end());
    offsets.push_back(edges.size());
  }
  return SimilarityGraph(n_nodes, std::move(offsets), std::move(edges), knn_k);
}

double SimilarityGraph::weighted_degree(std::size_t i) const {
  double s = 0.0;
  for (const Edge& e : neighbors(i)) s += e.weight;
  return s;
}

double SimilarityGraph::weight(NodeId i, NodeId j) const {
  auto nb = neighbors(i);
  auto it = std::lower_bound(nb.begin(), nb.end(), j,
                             [](const Edge& x, NodeId t) { return x.target < t; });
  return (it != nb.end() && it->target == j) ? it->weight : 0.0;
}

SimilarityGraph build_graph(const KnnIndex& index, const GraphOptions& options) {
  const std::size_t n = index.n_nodes(), k = index.k();
  if (k < 2) throw InvalidParameter("build_graph: need k >= 2");
  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dk = index.distances(i)[k - 1];
    sigma[i] = dk > 0.0 ? std::sqrt(dk) : options.sigma_floor;
  }

  struct Directed {
    NodeId lo, hi;
    double wbar, length;
  };
  std::vector<Directed> directed;
  directed.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    auto nb = index.neighbors(i);
    auto d = index.distances(i);
    for (std::size_t t = 0; t < k; ++t) {
      NodeId j = nb[t];
      double wbar = std::exp(-(d[t] * d[t]) / (sigma[i] * sigma[j]));
      NodeId a = static_cast<NodeId>(i);
      directed.push_back({std::min(a, j), std::max(a, j), wbar, d[t]});
    }
  }
  std::sort(directed.begin(), directed.end(), [](const Directed& x, const Directed& y) {
    return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi);
  });

  std::vector<std::tuple<NodeId, NodeId, double, double>> undirected;
  undirected.reserve(directed.size());
  for (std::size_t e = 0; e < directed.size();) {
    const Directed& cur = directed[e];
    double sum = cur.wbar;
    std::size_t next = e + 1;
    if (next < directed.size() && directed[next].lo == cur.lo && directed[next].hi == cur.hi) {
      sum += directed[next].wbar;
      ++next;
    }
    // Kernel underflow would drop the edge from the metric structure.
    double w = std::max(sum / 2.0, std::numeric_limits<double>::min());
    undirected.emplace_back(cur.lo, cur.hi, w, cur.length);
    e = next;
  }
  return SimilarityGraph::from_edges(n, undirected, k);
}

ComponentLabels connected_components(const SimilarityGraph& graph) {
  const std::size_t n = graph.n_nodes();
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  ComponentLabels out{std::vector<std::uint32_t>(n, kUnset), 0};
  std::vector<NodeId> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (out.component[s] != kUnset) continue;
    auto c = static_cast<std::uint32_t>(out.count++);
    out.component[s] = c;
    stack.push_back(static_cast<NodeId>(s));
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (const Edge& e : graph.neighbors(u))
        if (out.component[e.target] == kUnset) {
          out.component[e.target] = c;
          stack.push_back(e.target);
        }
    }
  }
  return out;
}

void write_graph(const std::filesystem::path& path, const SimilarityGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out.write(kGraphMagic, 4);
  detail::write_le<std::uint32_t>(out, kGraphVersion);
  detail::write_le<std::uint64_t>(out, graph.n_nodes());
  detail::write_le<std::uint64_t>(out, graph.knn_k());
  detail::write_le<std::uint64_t>(out, graph.edges().size());
  for (auto o : graph.offsets()) detail::write_le<std::uint64_t>(out, o);
  for (const Edge& e : graph.edges()) {
    detail::write_le<std::uint32_t>(out, e.target);
    detail::write_le<double>(out, e.weight);
    detail::write_le<double>(out, e.length);
  }
}

SimilarityGraph read_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != std::string_view(kGraphMagic, 4))
    throw InvalidInput("bad magic in graph file " + path.string());
  auto version = detail::read_le<std::uint32_t>(in);
  if (version != kGraphVersion)
    throw InvalidInput("unsupported graph file version " + std::to_string(version));
  auto n = detail::read_le<std::uint64_t>(in);
  auto k = detail::read_le<std::uint64_t>(in);
  auto m = detail::read_le<std::uint64_t>(in);
  std::vector<std::size_t> offsets(n + 1);
  for (auto& o : offsets) o = detail::read_le<std::uint64_t>(in);
  std::vector<Edge> edges(m);
  for (auto& e : edges) {
    e.target = detail::read_le<std::uint32_t>(in);
    e.weight = detail::read_le<double>(in);
    e.length = detail::read_le<double>(in);
  }
  return SimilarityGraph(n, std::move(offsets), std::move(edges), k);
}

}  // namespace gbal
