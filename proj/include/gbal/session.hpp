#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbal/acquisition.hpp"
#include "gbal/batch_select.hpp"
#include "gbal/config.hpp"
#include "gbal/knn_graph.hpp"
#include "gbal/laplace.hpp"

namespace gbal {

struct HistoryEntry {
  std::size_t iteration = 0;
  std::size_t labels_used = 0;
  std::optional<double> accuracy;   // only when ground truth is known
  double fit_seconds = 0.0;
  double selection_seconds = 0.0;   // selection performed right after this fit
  std::size_t next_query_size = 0;  // size of the batch that selection produced
};

void to_json(nlohmann::json& j, const HistoryEntry& h);
void from_json(const nlohmann::json& j, HistoryEntry& h);

struct SubmitResult {
  std::size_t accepted = 0;
  std::size_t outstanding = 0;  // pending ids still without a label
  bool advanced = false;        // the batch completed and the loop moved on
};

// One active-learning run as an explicit state machine.
//
// Iteration 0's query is the DAC core-set; every later query comes from the
// configured acquisition function and selector. Submitting the last label of
// the pending batch triggers fit -> record -> select. Labels are accepted only
// for ids of the current pending query.
class Session {
 public:
  Session(ExperimentConfig config, std::shared_ptr<const SimilarityGraph> graph, int n_classes,
          std::optional<std::vector<int>> truth = std::nullopt);

  // Runs DAC and publishes the core-set as the first query.
  void start();

  SubmitResult submit(std::size_t iteration, std::span<const std::pair<NodeId, int>> labels);

  bool started() const noexcept { return started_; }
  bool done() const noexcept { return done_; }
  std::size_t iteration() const noexcept { return pending_.iteration; }
  const QuerySet& pending() const noexcept { return pending_; }
  std::vector<NodeId> outstanding() const;
  const LabelState& labeled() const noexcept { return labeled_; }
  const std::vector<HistoryEntry>& history() const noexcept { return history_; }
  const std::optional<Prediction>& prediction() const noexcept { return prediction_; }
  const std::vector<NodeId>& core_set() const noexcept { return core_; }
  const ExperimentConfig& config() const noexcept { return config_; }
  const SimilarityGraph& graph() const noexcept { return *graph_; }
  int n_classes() const noexcept { return n_classes_; }
  std::size_t budget() const noexcept { return budget_; }
  std::size_t selection_cycles() const noexcept { return selection_cycles_; }
  std::size_t fits() const noexcept { return history_.size(); }
  const std::string& config_hash() const noexcept { return config_hash_; }

  // Versioned JSON snapshot holding everything needed for an identical continuation.
  nlohmann::json snapshot() const;
  static Session restore(const nlohmann::json& snapshot, ExperimentConfig config,
                         std::shared_ptr<const SimilarityGraph> graph,
                         std::optional<std::vector<int>> truth = std::nullopt);

  static constexpr int kSnapshotVersion = 1;

 private:
  void advance();
  QuerySet select_next(std::size_t size);
  AcquisitionVector evaluate_acquisition(std::span<const NodeId> candidates);

  ExperimentConfig config_;
  std::string config_hash_;
  std::shared_ptr<const SimilarityGraph> graph_;
  int n_classes_;
  std::optional<std::vector<int>> truth_;
  std::size_t budget_;

  bool started_ = false;
  bool done_ = false;
  LabelState labeled_;
  std::vector<char> is_labeled_;
  QuerySet pending_;
  std::vector<int> received_;  // per node, -1 until labeled in the pending batch
  std::vector<NodeId> core_;
  std::vector<HistoryEntry> history_;
  std::optional<Prediction> prediction_;
  std::size_t selection_cycles_ = 0;
  Rng rng_;
  std::optional<SpectralCache> spectral_;
};

}  // namespace gbal
