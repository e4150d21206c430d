#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbal/config.hpp"
#include "gbal/features.hpp"
#include "gbal/knn_graph.hpp"
#include "gbal/session.hpp"

namespace gbal {

class Oracle {
 public:
  virtual ~Oracle() = default;
  // Labels for `ids` in order, or nullopt when they are not available yet.
  virtual std::optional<std::vector<int>> answer(std::span<const NodeId> ids) = 0;
};

class GroundTruthOracle : public Oracle {
 public:
  explicit GroundTruthOracle(std::vector<int> labels) : labels_(std::move(labels)) {}
  std::optional<std::vector<int>> answer(std::span<const NodeId> ids) override;
  const std::vector<int>& labels() const noexcept { return labels_; }

 private:
  std::vector<int> labels_;
};

// Collects labels from a person. Only ids of the pending query are accepted.
class HumanOracle : public Oracle {
 public:
  void set_pending(std::span<const NodeId> ids);
  // Throws Conflict when `id` is not pending.
  void provide(NodeId id, int cls);
  std::optional<std::vector<int>> answer(std::span<const NodeId> ids) override;

 private:
  std::vector<NodeId> pending_;
  std::vector<std::pair<NodeId, int>> answers_;
};

// Builds the KNN similarity graph the way every harness entry point does,
// warning when it is disconnected.
SimilarityGraph build_similarity_graph(const FeatureMatrix& features, const ExperimentConfig& config);

enum class RunStatus { completed, paused };

struct ExperimentResult {
  RunStatus status = RunStatus::completed;
  std::vector<HistoryEntry> history;
  std::vector<NodeId> core;
  std::size_t selection_cycles = 0;
  std::size_t fits = 0;
  double selection_seconds = 0.0;  // summed over the loop
  double fit_seconds = 0.0;
  std::optional<double> final_accuracy;
  nlohmann::json snapshot;  // session state at return, resumable when paused
};

// Drives a started session until the budget is reached or the oracle stalls.
ExperimentResult drive(Session& session, Oracle& oracle);

ExperimentResult run_experiment(const ExperimentConfig& config, std::shared_ptr<const SimilarityGraph> graph,
                                Oracle& oracle, int n_classes,
                                std::optional<std::vector<int>> truth = std::nullopt);

ExperimentResult run_experiment(const ExperimentConfig& config, const FeatureMatrix& features, Oracle& oracle,
                                int n_classes, std::optional<std::vector<int>> truth = std::nullopt);

}  // namespace gbal
