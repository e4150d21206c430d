#include "gbal/dac.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <string>

#include "gbal/error.hpp"

namespace gbal {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dijkstra with a lazily-deleted binary heap. `visit(node, dist)` is called in
// settle order and returns false to stop the search.
template <typename Visit>
void dijkstra(const SimilarityGraph& g, NodeId source, std::vector<double>& dist,
              std::vector<NodeId>& touched, Visit&& visit) {
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  touched.push_back(source);
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    if (!visit(u, d)) return;
    for (const Edge& e : g.neighbors(u)) {
      double nd = d + e.length;
      if (nd < dist[e.target]) {
        if (dist[e.target] == kInf) touched.push_back(e.target);
        dist[e.target] = nd;
        heap.emplace(nd, e.target);
      }
    }
  }
}

// Reusable distance buffer; only touched entries are reset between searches.
class Workspace {
 public:
  explicit Workspace(std::size_t n) : dist_(n, kInf) {}

  template <typename Visit>
  void run(const SimilarityGraph& g, NodeId source, Visit&& visit) {
    for (NodeId t : touched_) dist_[t] = kInf;
    touched_.clear();
    dijkstra(g, source, dist_, touched_, std::forward<Visit>(visit));
  }

  std::vector<NodeId> ball(const SimilarityGraph& g, NodeId source, double radius) {
    std::vector<NodeId> out;
    if (!(radius > 0.0)) return out;
    run(g, source, [&](NodeId u, double d) {
      if (!(d < radius)) return false;
      out.push_back(u);
      return true;
    });
    std::sort(out.begin(), out.end());
    return out;
  }

  double density(const SimilarityGraph& g, NodeId source, std::size_t target) {
    std::size_t settled = 0;
    double last = 0.0;
    run(g, source, [&](NodeId, double d) {
      last = d;
      return ++settled < target;
    });
    if (settled >= target) return last;
    return std::nextafter(last, kInf);
  }

 private:
  std::vector<double> dist_;
  std::vector<NodeId> touched_;
};

std::size_t density_target(std::size_t n, double fraction) {
  double raw = fraction * static_cast<double>(n);
  // absorb representation error such as 0.05 * 2000 = 100.00000000000001
  auto target = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<std::size_t>(target, 1, n);
}

// Membership set over [0, n) supporting O(log n) rank selection.
class RankedSet {
 public:
  explicit RankedSet(std::size_t n) : tree_(n + 1, 0), member_(n, 0) {}

  bool contains(NodeId i) const { return member_[i]; }
  std::size_t size() const { return size_; }
  void insert(NodeId i) {
    if (member_[i]) return;
    member_[i] = 1;
    ++size_;
    update(i, +1);
  }
  void erase(NodeId i) {
    if (!member_[i]) return;
    member_[i] = 0;
    --size_;
    update(i, -1);
  }
  // The rank-th smallest member, 0-based.
  NodeId select(std::size_t rank) const {
    std::size_t pos = 0;
    std::size_t remaining = rank + 1;
    std::size_t step = std::bit_floor(tree_.size() - 1);
    for (; step > 0; step >>= 1) {
      if (pos + step < tree_.size() && static_cast<std::size_t>(tree_[pos + step]) < remaining) {
        pos += step;
        remaining -= tree_[pos];
      }
    }
    return static_cast<NodeId>(pos);
  }

 private:
  void update(NodeId i, int delta) {
    for (std::size_t p = i + 1; p < tree_.size(); p += p & (~p + 1)) tree_[p] += delta;
  }

  std::vector<int> tree_;
  std::vector<char> member_;
  std::size_t size_ = 0;
};

}  // namespace

std::vector<NodeId> dijkstra_ball(const SimilarityGraph& graph, NodeId source, double radius) {
  if (source >= graph.n_nodes()) throw InvalidInput("dijkstra_ball: source out of range");
  if (radius < 0.0) throw InvalidParameter("dijkstra_ball: radius must be >= 0");
  Workspace ws(graph.n_nodes());
  return ws.ball(graph, source, radius);
}

std::vector<double> shortest_paths(const SimilarityGraph& graph, NodeId source) {
  if (source >= graph.n_nodes()) throw InvalidInput("shortest_paths: source out of range");
  std::vector<double> dist(graph.n_nodes(), kInf);
  std::vector<NodeId> touched;
  dijkstra(graph, source, dist, touched, [](NodeId, double) { return true; });
  return dist;
}

double density_radius(const SimilarityGraph& graph, NodeId source, double fraction) {
  if (source >= graph.n_nodes()) throw InvalidInput("density_radius: source out of range");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InvalidParameter("density_radius: fraction must lie in (0, 1)");
  Workspace ws(graph.n_nodes());
  return ws.density(graph, source, density_target(graph.n_nodes(), fraction));
}

void DacParams::validate() const {
  if (auto* f = std::get_if<FixedRadii>(&radii)) {
    if (!(f->inner > 0.0 && f->inner <= f->outer))
      throw InvalidParameter("dac: need 0 < r <= R");
  } else {
    double p = std::get<DensityRadii>(radii).fraction;
    if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("dac: density fraction must lie in (0, 1)");
  }
}

DacResult dac(const SimilarityGraph& graph, std::span<const NodeId> initial, const DacParams& params) {
  params.validate();
  const std::size_t n = graph.n_nodes();
  if (n == 0) throw InvalidInput("dac: empty graph");
  Workspace ws(n);
  std::mt19937_64 rng(params.seed);

  std::vector<char> seen(n, 0);
  std::size_t seen_count = 0;
  RankedSet annulus(n);
  RankedSet unseen(n);
  for (NodeId i = 0; i < n; ++i) unseen.insert(i);

  const auto* fixed = std::get_if<FixedRadii>(&params.radii);
  const std::size_t target =
      fixed ? 0 : density_target(n, std::get<DensityRadii>(params.radii).fraction);

  DacResult result;
  std::vector<char> in_core(n, 0);
  auto absorb = [&](NodeId x, bool from_initial, bool jump) {
    double outer = fixed ? fixed->outer : ws.density(graph, x, target);
    double inner = fixed ? fixed->inner : outer / 2.0;
    auto mark_seen = [&](NodeId y) {
      if (seen[y]) return;
      seen[y] = 1;
      ++seen_count;
      unseen.erase(y);
      annulus.erase(y);
    };
    // x is seen even when r degenerates to 0.
    mark_seen(x);
    std::vector<NodeId> ring;
    ws.run(graph, x, [&](NodeId y, double d) {
      if (!(d < outer)) return false;
      if (d < inner) mark_seen(y);
      else ring.push_back(y);
      return true;
    });
    for (NodeId y : ring)
      if (!seen[y]) annulus.insert(y);
    result.core.push_back(x);
    in_core[x] = 1;
    result.trace.push_back({x, from_initial, jump, inner, outer, seen_count, annulus.size()});
  };

  for (NodeId x : initial) {
    if (x >= n) throw InvalidInput("dac: initial id out of range");
    if (in_core[x]) continue;
    absorb(x, true, false);
  }
  result.n_initial = result.core.size();

  while (seen_count < n) {
    bool jump = annulus.size() == 0;
    RankedSet& pool = jump ? unseen : annulus;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    absorb(pool.select(pick(rng)), false, jump);
  }
  return result;
}

}  // namespace gbal
