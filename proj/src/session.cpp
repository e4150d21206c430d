#include "gbal/session.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "gbal/dac.hpp"
#include "gbal/error.hpp"
#include "gbal/log.hpp"

namespace gbal {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr std::uint64_t kSelectorStream = 0x5bd1e995ULL;

}  // namespace

void to_json(nlohmann::json& j, const HistoryEntry& h) {
  j = nlohmann::json{{"iteration", h.iteration},
                     {"labels_used", h.labels_used},
                     {"accuracy", h.accuracy ? nlohmann::json(*h.accuracy) : nlohmann::json(nullptr)},
                     {"fit_seconds", h.fit_seconds},
                     {"selection_seconds", h.selection_seconds},
                     {"next_query_size", h.next_query_size}};
}

void from_json(const nlohmann::json& j, HistoryEntry& h) {
  j.at("iteration").get_to(h.iteration);
  j.at("labels_used").get_to(h.labels_used);
  h.accuracy = j.at("accuracy").is_null() ? std::nullopt : std::optional<double>(j.at("accuracy").get<double>());
  j.at("fit_seconds").get_to(h.fit_seconds);
  j.at("selection_seconds").get_to(h.selection_seconds);
  h.next_query_size = j.value("next_query_size", std::size_t{0});
}

Session::Session(ExperimentConfig config, std::shared_ptr<const SimilarityGraph> graph, int n_classes,
                 std::optional<std::vector<int>> truth)
    : config_(std::move(config)),
      config_hash_(config_.hash()),
      graph_(std::move(graph)),
      n_classes_(n_classes),
      truth_(std::move(truth)),
      budget_(0),
      rng_(config_.seed ^ kSelectorStream) {
  if (!graph_) throw InvalidInput("Session: graph is required");
  const std::size_t n = graph_->n_nodes();
  config_.validate(n);
  if (n_classes_ < 1) throw InvalidInput("Session: n_classes must be positive");
  if (truth_) {
    if (truth_->size() != n) throw InvalidInput("Session: truth must cover every node");
    for (int c : *truth_)
      if (c < 0 || c >= n_classes_) throw InvalidInput("Session: truth class out of range");
  }
  budget_ = config_.resolve_budget(n);
  labeled_.n_classes = n_classes_;
  is_labeled_.assign(n, 0);
  received_.assign(n, -1);
}

void Session::start() {
  if (started_) throw Conflict("Session: already started");
  DacParams params = config_.dac;
  params.seed = config_.seed;
  core_ = dac(*graph_, config_.initial_labeled, params).core;
  if (core_.size() >= budget_)
    warn("core-set size " + std::to_string(core_.size()) + " reaches the label budget " +
         std::to_string(budget_) + "; only the core-set will be evaluated");
  pending_ = QuerySet{core_, "dac", 0};
  started_ = true;
}

std::vector<NodeId> Session::outstanding() const {
  std::vector<NodeId> out;
  for (NodeId id : pending_.ids)
    if (received_[id] < 0) out.push_back(id);
  return out;
}

SubmitResult Session::submit(std::size_t iteration, std::span<const std::pair<NodeId, int>> labels) {
  if (!started_) throw Conflict("Session: not started");
  if (done_) throw Conflict("Session: budget reached, no pending query");
  if (iteration != pending_.iteration)
    throw Conflict("Session: stale iteration " + std::to_string(iteration) + " (current " +
                   std::to_string(pending_.iteration) + ")");
  std::vector<char> in_query(graph_->n_nodes(), 0);
  for (NodeId id : pending_.ids) in_query[id] = 1;
  // Validate everything before mutating so a rejected request changes nothing.
  for (auto [id, cls] : labels) {
    if (id >= graph_->n_nodes() || !in_query[id])
      throw Conflict("Session: node " + std::to_string(id) + " is not in the pending query");
    if (cls < 0 || cls >= n_classes_) throw InvalidInput("Session: unknown class id " + std::to_string(cls));
  }
  SubmitResult result;
  for (auto [id, cls] : labels) {
    received_[id] = cls;
    ++result.accepted;
  }
  result.outstanding = outstanding().size();
  if (result.outstanding == 0) {
    advance();
    result.advanced = true;
  }
  return result;
}

void Session::advance() {
  for (NodeId id : pending_.ids) {
    labeled_.add(id, received_[id]);
    is_labeled_[id] = 1;
    received_[id] = -1;
  }

  HistoryEntry entry;
  entry.iteration = pending_.iteration;
  entry.labels_used = labeled_.size();
  LaplaceOptions opts{config_.solver_tol, config_.solver_max_iter};
  auto t0 = Clock::now();
  prediction_ = laplace_learning(*graph_, labeled_, opts, prediction_ ? &*prediction_ : nullptr);
  entry.fit_seconds = seconds_since(t0);
  if (truth_) entry.accuracy = accuracy(*prediction_, *truth_, labeled_);

  const std::size_t next_iteration = pending_.iteration + 1;
  const std::size_t remaining_nodes = graph_->n_nodes() - labeled_.size();
  if (labeled_.size() >= budget_ || remaining_nodes == 0) {
    done_ = true;
    pending_ = QuerySet{{}, to_string(config_.selector), next_iteration};
  } else {
    std::size_t size = std::min(config_.batch_size, budget_ - labeled_.size());
    if (config_.selector == SelectorKind::sequential) size = 1;
    auto t1 = Clock::now();
    QuerySet q = select_next(size);
    entry.selection_seconds = seconds_since(t1);
    q.iteration = next_iteration;
    entry.next_query_size = q.ids.size();
    ++selection_cycles_;
    pending_ = std::move(q);
  }
  history_.push_back(entry);
}

AcquisitionVector Session::evaluate_acquisition(std::span<const NodeId> candidates) {
  if (config_.acquisition == AcquisitionKind::uc) return uncertainty(*prediction_, candidates);
  if (!spectral_) {
    SpectralOptions so = config_.spectral;
    so.seed = config_.seed;
    spectral_ = spectral_decompose(*graph_, so);
  }
  switch (config_.acquisition) {
    case AcquisitionKind::vopt: return vopt(*spectral_, candidates);
    case AcquisitionKind::mc: return model_change(*spectral_, *prediction_, candidates);
    case AcquisitionKind::mcvopt: return mc_vopt(*spectral_, *prediction_, candidates);
    case AcquisitionKind::uc: break;
  }
  return uncertainty(*prediction_, candidates);
}

QuerySet Session::select_next(std::size_t size) {
  std::vector<NodeId> candidates;
  candidates.reserve(graph_->n_nodes() - labeled_.size());
  for (NodeId i = 0; i < graph_->n_nodes(); ++i)
    if (!is_labeled_[i]) candidates.push_back(i);

  if (config_.selector == SelectorKind::random) return random_batch(candidates, size, rng_);
  AcquisitionVector acq = evaluate_acquisition(candidates);
  switch (config_.selector) {
    case SelectorKind::localmax: return local_max_batch(*graph_, acq, labeled_.ids, size);
    case SelectorKind::sequential: return sequential_select(acq);
    case SelectorKind::topmax: return top_max_batch(acq, size);
    case SelectorKind::acqsample: return acq_sample_batch(acq, size, rng_);
    case SelectorKind::random: break;
  }
  return random_batch(candidates, size, rng_);
}

nlohmann::json Session::snapshot() const {
  std::ostringstream rng_state;
  rng_state << rng_;
  nlohmann::json received = nlohmann::json::array();
  for (NodeId id : pending_.ids)
    if (received_[id] >= 0) received.push_back({id, received_[id]});
  nlohmann::json j{
      {"format", "gbal-session"},
      {"version", kSnapshotVersion},
      {"config_hash", config_hash_},
      {"config", config_},
      {"n_nodes", graph_->n_nodes()},
      {"n_classes", n_classes_},
      {"started", started_},
      {"done", done_},
      {"core", core_},
      {"labeled_ids", labeled_.ids},
      {"labeled_classes", labeled_.classes},
      {"pending", pending_},
      {"received", received},
      {"history", history_},
      {"selection_cycles", selection_cycles_},
      {"rng", rng_state.str()},
  };
  j["prediction"] = prediction_ ? nlohmann::json(prediction_->scores()) : nlohmann::json(nullptr);
  return j;
}

Session Session::restore(const nlohmann::json& s, ExperimentConfig config,
                         std::shared_ptr<const SimilarityGraph> graph, std::optional<std::vector<int>> truth) {
  if (s.value("format", "") != "gbal-session" || s.value("version", 0) != kSnapshotVersion)
    throw InvalidInput("Session::restore: unsupported snapshot format");
  if (s.at("config_hash").get<std::string>() != config.hash())
    throw InvalidInput("Session::restore: snapshot was produced with a different config");
  Session out(std::move(config), std::move(graph), s.at("n_classes").get<int>(), std::move(truth));
  if (s.at("n_nodes").get<std::size_t>() != out.graph_->n_nodes())
    throw InvalidInput("Session::restore: node count mismatch");
  out.started_ = s.at("started").get<bool>();
  out.done_ = s.at("done").get<bool>();
  s.at("core").get_to(out.core_);
  s.at("labeled_ids").get_to(out.labeled_.ids);
  s.at("labeled_classes").get_to(out.labeled_.classes);
  out.labeled_.validate(out.graph_->n_nodes());
  for (NodeId id : out.labeled_.ids) out.is_labeled_[id] = 1;
  s.at("pending").get_to(out.pending_);
  std::vector<char> in_query(out.graph_->n_nodes(), 0);
  for (NodeId id : out.pending_.ids) {
    if (id >= out.graph_->n_nodes() || out.is_labeled_[id] || in_query[id])
      throw InvalidInput("Session::restore: invalid pending id " + std::to_string(id));
    in_query[id] = 1;
  }
  for (const auto& pair : s.at("received")) {
    auto id = pair.at(0).get<NodeId>();
    int cls = pair.at(1).get<int>();
    if (id >= out.graph_->n_nodes() || !in_query[id] || cls < 0 || cls >= out.n_classes_)
      throw InvalidInput("Session::restore: invalid received label");
    out.received_[id] = cls;
  }
  s.at("history").get_to(out.history_);
  s.at("selection_cycles").get_to(out.selection_cycles_);
  std::istringstream rng_state(s.at("rng").get<std::string>());
  rng_state >> out.rng_;
  if (!s.at("prediction").is_null())
    out.prediction_ = Prediction(out.graph_->n_nodes(), out.n_classes_, s.at("prediction").get<std::vector<double>>());
  return out;
}

}  // namespace gbal
