#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbal/acquisition.hpp"
#include "gbal/knn_graph.hpp"

namespace gbal {

using Rng = std::mt19937_64;

struct QuerySet {
  std::vector<NodeId> ids;
  std::string method;
  std::size_t iteration = 0;
};

void to_json(nlohmann::json& j, const QuerySet& q);
void from_json(const nlohmann::json& j, QuerySet& q);

struct LocalMaxStats {
  std::size_t adjacency_touches = 0;  // edges read across all examined nodes
  std::size_t examined = 0;           // nodes popped as the current maximum
};

// Up to `batch_size` local maxima of the acquisition function. Candidates are
// visited in decreasing value (smaller id first on ties); each visited node is
// accepted when no graph neighbor has a larger value and then removed from
// further consideration together with its neighbors. Labeled nodes count as
// value 0; other nodes keep their values even after removal.
QuerySet local_max_batch(const SimilarityGraph& graph, const AcquisitionVector& acq,
                         std::span<const NodeId> labeled, std::size_t batch_size,
                         LocalMaxStats* stats = nullptr);

// argmax with smallest-id tie-break. Throws InvalidInput on an empty vector.
QuerySet sequential_select(const AcquisitionVector& acq);

QuerySet top_max_batch(const AcquisitionVector& acq, std::size_t batch_size);

QuerySet random_batch(std::span<const NodeId> candidates, std::size_t batch_size, Rng& rng);

// Successive draws without replacement, each proportional to the remaining
// values; zero-valued candidates are only drawn once positive mass runs out.
QuerySet acq_sample_batch(const AcquisitionVector& acq, std::size_t batch_size, Rng& rng);

}  // namespace gbal
