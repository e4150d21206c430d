#include "gbal/experiment.hpp"

#include <algorithm>

#include "gbal/error.hpp"
#include "gbal/log.hpp"

namespace gbal {

std::optional<std::vector<int>> GroundTruthOracle::answer(std::span<const NodeId> ids) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (NodeId id : ids) {
    if (id >= labels_.size()) throw InvalidInput("GroundTruthOracle: id out of range");
    out.push_back(labels_[id]);
  }
  return out;
}

void HumanOracle::set_pending(std::span<const NodeId> ids) {
  pending_.assign(ids.begin(), ids.end());
  answers_.clear();
}

void HumanOracle::provide(NodeId id, int cls) {
  if (std::find(pending_.begin(), pending_.end(), id) == pending_.end())
    throw Conflict("HumanOracle: node " + std::to_string(id) + " is not pending");
  auto it = std::find_if(answers_.begin(), answers_.end(), [&](const auto& a) { return a.first == id; });
  if (it != answers_.end()) it->second = cls;
  else answers_.emplace_back(id, cls);
}

std::optional<std::vector<int>> HumanOracle::answer(std::span<const NodeId> ids) {
  std::vector<int> out;
  for (NodeId id : ids) {
    auto it = std::find_if(answers_.begin(), answers_.end(), [&](const auto& a) { return a.first == id; });
    if (it == answers_.end()) return std::nullopt;
    out.push_back(it->second);
  }
  return out;
}

SimilarityGraph build_similarity_graph(const FeatureMatrix& features, const ExperimentConfig& config) {
  auto index = knn_search(features, config.resolve_k(features.n_points()), config.knn_method);
  auto graph = build_graph(index);
  auto comps = connected_components(graph);
  if (comps.count > 1)
    warn("similarity graph has " + std::to_string(comps.count) + " connected components");
  return graph;
}

ExperimentResult drive(Session& session, Oracle& oracle) {
  if (!session.started()) session.start();
  ExperimentResult result;
  result.status = RunStatus::completed;
  while (!session.done()) {
    auto ids = session.outstanding();
    auto labels = oracle.answer(ids);
    if (!labels) {
      result.status = RunStatus::paused;
      break;
    }
    std::vector<std::pair<NodeId, int>> batch;
    batch.reserve(ids.size());
    for (std::size_t t = 0; t < ids.size(); ++t) batch.emplace_back(ids[t], (*labels)[t]);
    session.submit(session.iteration(), batch);
  }
  result.history = session.history();
  result.core = session.core_set();
  result.selection_cycles = session.selection_cycles();
  result.fits = session.fits();
  for (const auto& h : result.history) {
    result.selection_seconds += h.selection_seconds;
    result.fit_seconds += h.fit_seconds;
  }
  if (!result.history.empty()) result.final_accuracy = result.history.back().accuracy;
  result.snapshot = session.snapshot();
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::shared_ptr<const SimilarityGraph> graph,
                                Oracle& oracle, int n_classes, std::optional<std::vector<int>> truth) {
  Session session(config, std::move(graph), n_classes, std::move(truth));
  session.start();
  return drive(session, oracle);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const FeatureMatrix& features, Oracle& oracle,
                                int n_classes, std::optional<std::vector<int>> truth) {
  auto graph = std::make_shared<const SimilarityGraph>(build_similarity_graph(features, config));
  return run_experiment(config, std::move(graph), oracle, n_classes, std::move(truth));
}

}  // namespace gbal
