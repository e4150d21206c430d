#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbal/acquisition.hpp"
#include "gbal/dac.hpp"
#include "gbal/knn_graph.hpp"

namespace gbal {

enum class AcquisitionKind { uc, vopt, mc, mcvopt };
enum class SelectorKind { localmax, sequential, random, topmax, acqsample };

std::string to_string(AcquisitionKind k);
std::string to_string(SelectorKind k);
AcquisitionKind parse_acquisition(const std::string& name);
SelectorKind parse_selector(const std::string& name);

struct ExperimentConfig {
  std::size_t batch_size = 15;
  AcquisitionKind acquisition = AcquisitionKind::uc;
  SelectorKind selector = SelectorKind::localmax;
  // Total labels at the end of the run, core-set included. An absolute count
  // takes precedence over the fraction.
  std::optional<std::size_t> budget;
  double budget_fraction = 0.15;
  DacParams dac;
  double solver_tol = 1e-8;
  std::size_t solver_max_iter = 0;
  std::uint64_t seed = 0;
  std::size_t knn_k = 0;  // 0 selects default_k(N)
  KnnMethod knn_method = KnnMethod::exact;
  SpectralOptions spectral;
  std::vector<NodeId> initial_labeled;

  std::size_t resolve_budget(std::size_t n_nodes) const;
  std::size_t resolve_k(std::size_t n_nodes) const;
  // Throws InvalidParameter when the config cannot run on n_nodes points.
  void validate(std::size_t n_nodes) const;
  // Stable 16-hex-digit FNV-1a digest of the canonical JSON form.
  std::string hash() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace gbal
