#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "gbal/knn_graph.hpp"

namespace gbal {

// Observed labels: parallel arrays of node ids and class ids.
struct LabelState {
  int n_classes = 0;
  std::vector<NodeId> ids;
  std::vector<int> classes;

  void add(NodeId id, int cls) {
    ids.push_back(id);
    classes.push_back(cls);
  }
  std::size_t size() const noexcept { return ids.size(); }

  // Throws InvalidInput on duplicate or out-of-range ids and invalid class ids.
  void validate(std::size_t n_nodes) const;
};

// N x n_classes matrix of class scores, row-major.
class Prediction {
 public:
  Prediction() = default;
  Prediction(std::size_t n_nodes, int n_classes, std::vector<double> scores);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  int n_classes() const noexcept { return n_classes_; }
  std::span<const double> row(std::size_t i) const {
    return {scores_.data() + i * n_classes_, static_cast<std::size_t>(n_classes_)};
  }
  double at(std::size_t i, int c) const { return scores_[i * n_classes_ + c]; }
  const std::vector<double>& scores() const noexcept { return scores_; }

 private:
  std::size_t n_nodes_ = 0;
  int n_classes_ = 0;
  std::vector<double> scores_;
};

struct LaplaceOptions {
  double tol = 1e-8;
  // 0 selects 10 * N.
  std::size_t max_iter = 0;
};

struct SolveStats {
  std::size_t iterations = 0;           // summed over classes
  double relative_residual = 0.0;       // worst class
  std::size_t unreachable_nodes = 0;    // unlabeled nodes in label-free components
};

// Minimizes the Dirichlet energy 1/2 <U, L U> with U fixed to the one-hot
// labels on labeled rows, L = D - W. The free block solves
// L_uu U_u = W_ul Y_l by Jacobi-preconditioned CG per class, stopping once
// ||r|| <= tol * ||W_ul Y_l||. Nodes in components without any label get
// uniform scores 1/n_classes and trigger a warning.
//
// `warm_start`, when given, supplies the initial guess for the free rows.
Prediction laplace_learning(const SimilarityGraph& graph, const LabelState& labels,
                            const LaplaceOptions& options = {},
                            const Prediction* warm_start = nullptr, SolveStats* stats = nullptr);

// Row argmax; ties go to the smallest class index.
std::vector<int> predict_labels(const Prediction& pred);

// Fraction of unlabeled nodes whose predicted class equals `truth`. Returns 1
// when every node is labeled.
double accuracy(const Prediction& pred, std::span<const int> truth, const LabelState& labels);

// CSV columns: node, score_0..score_{c-1}, label.
void write_prediction_csv(const std::filesystem::path& path, const Prediction& pred);

}  // namespace gbal
