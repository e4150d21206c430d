#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "gbal/features.hpp"
#include "gbal/session.hpp"

namespace httplib {
class Server;
}

namespace gbal {

struct ServiceOptions {
  std::vector<std::string> class_names;  // defaults to "class_<id>"
  std::optional<FeatureMatrix> preview_features;
  std::size_t preview_dims = 2;
  std::vector<std::string> image_paths;  // per node, optional
  std::optional<std::filesystem::path> snapshot_path;  // rewritten after every accepted submission
  std::optional<std::filesystem::path> ui_dir;         // served statically at /
};

// HTTP/JSON front end over one Session. Reads run concurrently; label
// submissions and loop advancement are serialized.
//
//   GET  /api/session      iteration, labeled_count, budget, accuracy_history
//   GET  /api/query        pending ids for the current iteration
//   POST /api/labels       {iteration, labels: [{id, class}]}
//   GET  /api/classes      class id/name list
//   GET  /api/points/{id}  per-node metadata
//
// Every response carries the session's config_hash. Stale iterations and ids
// outside the pending query answer 409; malformed bodies and unknown classes 400.
class LabelService {
 public:
  LabelService(Session session, ServiceOptions options);
  ~LabelService();
  LabelService(const LabelService&) = delete;
  LabelService& operator=(const LabelService&) = delete;

  // Binds without serving; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void serve();
  void stop();

  nlohmann::json session_view() const;
  std::string config_hash() const;

 private:
  void install_routes();
  void persist() const;

  Session session_;
  ServiceOptions options_;
  mutable std::shared_mutex mutex_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace gbal
