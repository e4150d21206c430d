#include "gbal/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gbal/error.hpp"

namespace gbal {

std::string to_string(AcquisitionKind k) {
  switch (k) {
    case AcquisitionKind::uc: return "uc";
    case AcquisitionKind::vopt: return "vopt";
    case AcquisitionKind::mc: return "mc";
    case AcquisitionKind::mcvopt: return "mcvopt";
  }
  return "?";
}

std::string to_string(SelectorKind k) {
  switch (k) {
    case SelectorKind::localmax: return "localmax";
    case SelectorKind::sequential: return "sequential";
    case SelectorKind::random: return "random";
    case SelectorKind::topmax: return "topmax";
    case SelectorKind::acqsample: return "acqsample";
  }
  return "?";
}

AcquisitionKind parse_acquisition(const std::string& name) {
  for (auto k : {AcquisitionKind::uc, AcquisitionKind::vopt, AcquisitionKind::mc, AcquisitionKind::mcvopt})
    if (to_string(k) == name) return k;
  throw InvalidParameter("unknown acquisition function: " + name);
}

SelectorKind parse_selector(const std::string& name) {
  for (auto k : {SelectorKind::localmax, SelectorKind::sequential, SelectorKind::random,
                 SelectorKind::topmax, SelectorKind::acqsample})
    if (to_string(k) == name) return k;
  throw InvalidParameter("unknown selector: " + name);
}

std::size_t ExperimentConfig::resolve_budget(std::size_t n_nodes) const {
  if (budget) return *budget;
  return static_cast<std::size_t>(std::llround(budget_fraction * static_cast<double>(n_nodes)));
}

std::size_t ExperimentConfig::resolve_k(std::size_t n_nodes) const {
  return knn_k ? knn_k : default_k(n_nodes);
}

void ExperimentConfig::validate(std::size_t n_nodes) const {
  if (batch_size < 1) throw InvalidParameter("config: batch_size must be >= 1");
  if (!budget && !(budget_fraction > 0.0 && budget_fraction <= 1.0))
    throw InvalidParameter("config: budget_fraction must lie in (0, 1]");
  if (resolve_budget(n_nodes) > n_nodes) throw InvalidParameter("config: budget exceeds N");
  if (!(solver_tol > 0.0)) throw InvalidParameter("config: solver_tol must be positive");
  if (knn_k != 0 && (knn_k < 2 || knn_k >= n_nodes))
    throw InvalidParameter("config: knn_k must satisfy 2 <= k < N");
  dac.validate();
  for (NodeId id : initial_labeled)
    if (id >= n_nodes) throw InvalidParameter("config: initial_labeled id out of range");
}

std::string ExperimentConfig::hash() const {
  nlohmann::json j = *this;
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json dac;
  if (auto* f = std::get_if<FixedRadii>(&c.dac.radii))
    dac = {{"mode", "fixed"}, {"r", f->inner}, {"R", f->outer}};
  else
    dac = {{"mode", "density"}, {"p", std::get<DensityRadii>(c.dac.radii).fraction}};
  j = nlohmann::json{
      {"batch_size", c.batch_size},
      {"acquisition", to_string(c.acquisition)},
      {"selector", to_string(c.selector)},
      {"budget", c.budget ? nlohmann::json(*c.budget) : nlohmann::json(nullptr)},
      {"budget_fraction", c.budget_fraction},
      {"dac", dac},
      {"solver_tol", c.solver_tol},
      {"solver_max_iter", c.solver_max_iter},
      {"seed", c.seed},
      {"knn_k", c.knn_k},
      {"knn_method", c.knn_method == KnnMethod::exact ? "exact" : "vptree"},
      {"spectral", {{"m", c.spectral.m}, {"tau", c.spectral.tau}, {"gamma2", c.spectral.gamma2}}},
      {"initial_labeled", c.initial_labeled},
  };
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
  if (j.contains("acquisition")) c.acquisition = parse_acquisition(j.at("acquisition").get<std::string>());
  if (j.contains("selector")) c.selector = parse_selector(j.at("selector").get<std::string>());
  if (j.contains("budget") && !j.at("budget").is_null()) c.budget = j.at("budget").get<std::size_t>();
  if (j.contains("budget_fraction")) j.at("budget_fraction").get_to(c.budget_fraction);
  if (j.contains("dac")) {
    const auto& d = j.at("dac");
    std::string mode = d.value("mode", "density");
    if (mode == "fixed")
      c.dac.radii = FixedRadii{d.at("r").get<double>(), d.at("R").get<double>()};
    else if (mode == "density")
      c.dac.radii = DensityRadii{d.value("p", 0.05)};
    else
      throw InvalidParameter("config: unknown dac mode " + mode);
  }
  if (j.contains("solver_tol")) j.at("solver_tol").get_to(c.solver_tol);
  if (j.contains("solver_max_iter")) j.at("solver_max_iter").get_to(c.solver_max_iter);
  if (j.contains("seed")) j.at("seed").get_to(c.seed);
  if (j.contains("knn_k")) j.at("knn_k").get_to(c.knn_k);
  if (j.contains("knn_method")) {
    auto m = j.at("knn_method").get<std::string>();
    if (m == "exact") c.knn_method = KnnMethod::exact;
    else if (m == "vptree") c.knn_method = KnnMethod::vptree;
    else throw InvalidParameter("config: unknown knn_method " + m);
  }
  if (j.contains("spectral")) {
    const auto& s = j.at("spectral");
    c.spectral.m = s.value("m", std::size_t{0});
    c.spectral.tau = s.value("tau", 0.1);
    c.spectral.gamma2 = s.value("gamma2", 0.01);
  }
  if (j.contains("initial_labeled")) j.at("initial_labeled").get_to(c.initial_labeled);
  c.dac.seed = c.seed;
  c.spectral.seed = c.seed;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("malformed config " + path.string() + ": " + e.what());
  }
  return j.get<ExperimentConfig>();
}

}  // namespace gbal
