#include "gbal/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "gbal/error.hpp"
#include "gbal/log.hpp"

namespace gbal {

void LabelState::validate(std::size_t n_nodes) const {
  if (n_classes < 1) throw InvalidInput("LabelState: n_classes must be positive");
  if (ids.size() != classes.size()) throw InvalidInput("LabelState: ids/classes length mismatch");
  std::vector<char> seen(n_nodes, 0);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] >= n_nodes) throw InvalidInput("LabelState: node id out of range");
    if (seen[ids[t]]) throw InvalidInput("LabelState: duplicate node id " + std::to_string(ids[t]));
    seen[ids[t]] = 1;
    if (classes[t] < 0 || classes[t] >= n_classes)
      throw InvalidInput("LabelState: class id out of range");
  }
}

Prediction::Prediction(std::size_t n_nodes, int n_classes, std::vector<double> scores)
    : n_nodes_(n_nodes), n_classes_(n_classes), scores_(std::move(scores)) {
  if (n_classes_ < 1 || scores_.size() != n_nodes_ * static_cast<std::size_t>(n_classes_))
    throw InvalidInput("Prediction: score matrix shape mismatch");
}

Prediction laplace_learning(const SimilarityGraph& graph, const LabelState& labels,
                            const LaplaceOptions& options, const Prediction* warm_start,
                            SolveStats* stats) {
  const std::size_t n = graph.n_nodes();
  const int nc = labels.n_classes;
  if (labels.size() == 0) throw InvalidInput("laplace_learning: no labeled nodes");
  if (!(options.tol > 0.0)) throw InvalidParameter("laplace_learning: tol must be positive");
  labels.validate(n);
  if (warm_start && (warm_start->n_nodes() != n || warm_start->n_classes() != nc))
    throw InvalidInput("laplace_learning: warm start shape mismatch");
  const std::size_t max_iter = options.max_iter ? options.max_iter : 10 * n;

  std::vector<double> scores(n * nc, 0.0);
  std::vector<int> label_of(n, -1);
  for (std::size_t t = 0; t < labels.size(); ++t) label_of[labels.ids[t]] = labels.classes[t];

  auto comps = connected_components(graph);
  std::vector<char> comp_has_label(comps.count, 0);
  for (NodeId id : labels.ids) comp_has_label[comps.component[id]] = 1;

  // free index <-> node id
  std::vector<std::size_t> free_pos(n, std::numeric_limits<std::size_t>::max());
  std::vector<NodeId> free_nodes;
  SolveStats local;
  for (std::size_t i = 0; i < n; ++i) {
    if (label_of[i] >= 0) {
      scores[i * nc + label_of[i]] = 1.0;
    } else if (!comp_has_label[comps.component[i]]) {
      std::fill_n(scores.begin() + i * nc, nc, 1.0 / nc);
      ++local.unreachable_nodes;
    } else {
      free_pos[i] = free_nodes.size();
      free_nodes.push_back(static_cast<NodeId>(i));
    }
  }
  if (local.unreachable_nodes > 0)
    warn(std::to_string(local.unreachable_nodes) +
         " unlabeled nodes lie in components without labels; assigned uniform scores");

  const std::size_t m = free_nodes.size();
  std::vector<double> diag(m);
  for (std::size_t p = 0; p < m; ++p) diag[p] = graph.weighted_degree(free_nodes[p]);

  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t p = 0; p < m; ++p) {
      double acc = diag[p] * x[p];
      for (const Edge& e : graph.neighbors(free_nodes[p])) {
        std::size_t q = free_pos[e.target];
        if (q != std::numeric_limits<std::size_t>::max()) acc -= e.weight * x[q];
      }
      y[p] = acc;
    }
  };
  auto dotv = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };

  std::vector<double> b(m), x(m), r(m), z(m), p(m), q(m);
  for (int c = 0; c < nc && m > 0; ++c) {
    for (std::size_t t = 0; t < m; ++t) {
      double acc = 0.0;
      for (const Edge& e : graph.neighbors(free_nodes[t]))
        if (label_of[e.target] == c) acc += e.weight;
      b[t] = acc;
      x[t] = warm_start ? warm_start->at(free_nodes[t], c) : 0.0;
    }
    apply(x, q);
    for (std::size_t t = 0; t < m; ++t) r[t] = b[t] - q[t];
    const double bnorm = std::sqrt(dotv(b, b));
    const double target = options.tol * bnorm;
    double rnorm = std::sqrt(dotv(r, r));
    std::size_t it = 0;
    if (rnorm > target) {
      for (std::size_t t = 0; t < m; ++t) z[t] = r[t] / diag[t];
      p = z;
      double rz = dotv(r, z);
      while (rnorm > target) {
        if (it >= max_iter)
          throw ConvergenceError("laplace_learning: CG did not converge in " +
                                     std::to_string(max_iter) + " iterations",
                                 bnorm > 0 ? rnorm / bnorm : rnorm);
        apply(p, q);
        double alpha = rz / dotv(p, q);
        for (std::size_t t = 0; t < m; ++t) {
          x[t] += alpha * p[t];
          r[t] -= alpha * q[t];
        }
        rnorm = std::sqrt(dotv(r, r));
        ++it;
        for (std::size_t t = 0; t < m; ++t) z[t] = r[t] / diag[t];
        double rz_next = dotv(r, z);
        double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t t = 0; t < m; ++t) p[t] = z[t] + beta * p[t];
      }
    }
    local.iterations += it;
    local.relative_residual = std::max(local.relative_residual, bnorm > 0 ? rnorm / bnorm : 0.0);
    for (std::size_t t = 0; t < m; ++t) scores[free_nodes[t] * nc + c] = x[t];
  }
  if (stats) *stats = local;
  return Prediction(n, nc, std::move(scores));
}

std::vector<int> predict_labels(const Prediction& pred) {
  std::vector<int> out(pred.n_nodes());
  for (std::size_t i = 0; i < pred.n_nodes(); ++i) {
    auto row = pred.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double accuracy(const Prediction& pred, std::span<const int> truth, const LabelState& labels) {
  if (truth.size() != pred.n_nodes()) throw InvalidInput("accuracy: truth must cover every node");
  std::vector<char> is_labeled(pred.n_nodes(), 0);
  for (NodeId id : labels.ids) is_labeled[id] = 1;
  auto predicted = predict_labels(pred);
  std::size_t total = 0, correct = 0;
  for (std::size_t i = 0; i < pred.n_nodes(); ++i) {
    if (is_labeled[i]) continue;
    ++total;
    correct += predicted[i] == truth[i];
  }
  return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

void write_prediction_csv(const std::filesystem::path& path, const Prediction& pred) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out.precision(17);
  out << "node";
  for (int c = 0; c < pred.n_classes(); ++c) out << ",score_" << c;
  out << ",label\n";
  auto labels = predict_labels(pred);
  for (std::size_t i = 0; i < pred.n_nodes(); ++i) {
    out << i;
    for (double v : pred.row(i)) out << ',' << v;
    out << ',' << labels[i] << '\n';
  }
}

}  // namespace gbal
