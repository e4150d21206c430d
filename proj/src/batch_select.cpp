#include "gbal/batch_select.hpp"

#include <algorithm>
#include <numeric>

#include "gbal/error.hpp"
#include "gbal/log.hpp"

namespace gbal {
namespace {

// Candidate positions ordered by value descending, id ascending.
std::vector<std::size_t> ranked_positions(const AcquisitionVector& acq) {
  std::vector<std::size_t> order(acq.size());
  std::iota(order.begin(), order.end(), 0);
  auto values = acq.values();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

}  // namespace

void to_json(nlohmann::json& j, const QuerySet& q) {
  j = nlohmann::json{{"iteration", q.iteration}, {"method", q.method}, {"ids", q.ids}};
}

void from_json(const nlohmann::json& j, QuerySet& q) {
  j.at("iteration").get_to(q.iteration);
  j.at("method").get_to(q.method);
  j.at("ids").get_to(q.ids);
}

QuerySet local_max_batch(const SimilarityGraph& graph, const AcquisitionVector& acq,
                         std::span<const NodeId> labeled, std::size_t batch_size,
                         LocalMaxStats* stats) {
  if (batch_size < 1) throw InvalidParameter("local_max_batch: batch size must be >= 1");
  const std::size_t n = graph.n_nodes();
  std::vector<double> value = acq.extended(n);
  std::vector<char> active(n, 0);
  for (NodeId id : acq.ids()) active[id] = 1;
  for (NodeId id : labeled) {
    if (id >= n) throw InvalidInput("local_max_batch: labeled id out of range");
    value[id] = 0.0;
    active[id] = 0;
  }

  QuerySet q{{}, "localmax", 0};
  LocalMaxStats local;
  // Sorting once replaces the repeated argmax over the shrinking set.
  for (std::size_t pos : ranked_positions(acq)) {
    if (q.ids.size() >= batch_size) break;
    NodeId k = acq.ids()[pos];
    if (!active[k]) continue;
    ++local.examined;
    bool is_max = true;
    active[k] = 0;
    for (const Edge& e : graph.neighbors(k)) {
      ++local.adjacency_touches;
      if (value[e.target] > value[k]) is_max = false;
      active[e.target] = 0;
    }
    if (is_max) q.ids.push_back(k);
  }
  if (stats) *stats = local;
  return q;
}

QuerySet sequential_select(const AcquisitionVector& acq) {
  if (acq.empty()) throw InvalidInput("sequential_select: empty candidate set");
  auto values = acq.values();
  auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  return QuerySet{{acq.ids()[best]}, "sequential", 0};
}

QuerySet top_max_batch(const AcquisitionVector& acq, std::size_t batch_size) {
  auto order = ranked_positions(acq);
  QuerySet q{{}, "topmax", 0};
  for (std::size_t t = 0; t < std::min(batch_size, order.size()); ++t) q.ids.push_back(acq.ids()[order[t]]);
  return q;
}

QuerySet random_batch(std::span<const NodeId> candidates, std::size_t batch_size, Rng& rng) {
  auto pool = normalize_candidates(candidates);
  std::size_t take = std::min(batch_size, pool.size());
  // Partial Fisher-Yates over the ascending pool.
  for (std::size_t t = 0; t < take; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, pool.size() - 1);
    std::swap(pool[t], pool[pick(rng)]);
  }
  pool.resize(take);
  return QuerySet{std::move(pool), "random", 0};
}

QuerySet acq_sample_batch(const AcquisitionVector& acq, std::size_t batch_size, Rng& rng) {
  auto values = acq.values();
  std::vector<std::size_t> positive, zero;
  for (std::size_t t = 0; t < acq.size(); ++t) (values[t] > 0.0 ? positive : zero).push_back(t);
  if (positive.empty()) {
    warn("acq_sample_batch: all acquisition values are zero; falling back to random sampling");
    auto q = random_batch(acq.ids(), batch_size, rng);
    q.method = "acqsample";
    return q;
  }

  QuerySet q{{}, "acqsample", 0};
  std::vector<double> weight(positive.size());
  for (std::size_t t = 0; t < positive.size(); ++t) weight[t] = values[positive[t]];
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t remaining = positive.size();
  while (q.ids.size() < batch_size && remaining > 0) {
    double total = 0.0;
    for (double w : weight) total += w;
    double u = unit(rng) * total;
    std::size_t chosen = weight.size();
    double acc = 0.0;
    for (std::size_t t = 0; t < weight.size(); ++t) {
      if (weight[t] <= 0.0) continue;
      acc += weight[t];
      chosen = t;
      if (u < acc) break;
    }
    q.ids.push_back(acq.ids()[positive[chosen]]);
    weight[chosen] = 0.0;
    --remaining;
  }
  if (q.ids.size() < batch_size && !zero.empty()) {
    std::vector<NodeId> rest;
    for (std::size_t t : zero) rest.push_back(acq.ids()[t]);
    auto extra = random_batch(rest, batch_size - q.ids.size(), rng);
    q.ids.insert(q.ids.end(), extra.ids.begin(), extra.ids.end());
  }
  return q;
}

}  // namespace gbal
