#include "gbal/service.hpp"

#include <fstream>
#include <mutex>

#include <httplib.h>

#include "gbal/error.hpp"
#include "gbal/log.hpp"

namespace gbal {
namespace {

void reply(httplib::Response& res, int status, nlohmann::json body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

LabelService::LabelService(Session session, ServiceOptions options)
    : session_(std::move(session)), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  if (!session_.started()) session_.start();
  install_routes();
}

LabelService::~LabelService() { stop(); }

int LabelService::bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("LabelService: cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void LabelService::serve() { server_->listen_after_bind(); }

void LabelService::stop() {
  if (server_) server_->stop();
}

std::string LabelService::config_hash() const { return session_.config_hash(); }

nlohmann::json LabelService::session_view() const {
  std::shared_lock lock(mutex_);
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : session_.history())
    hist.push_back({{"iteration", h.iteration},
                    {"labels_used", h.labels_used},
                    {"accuracy", h.accuracy ? nlohmann::json(*h.accuracy) : nlohmann::json(nullptr)}});
  return {{"config_hash", session_.config_hash()},
          {"iteration", session_.iteration()},
          {"labeled_count", session_.labeled().size()},
          {"budget", session_.budget()},
          {"done", session_.done()},
          {"accuracy_history", hist}};
}

void LabelService::persist() const {
  if (!options_.snapshot_path) return;
  auto tmp = *options_.snapshot_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    out << session_.snapshot().dump();
  }
  std::filesystem::rename(tmp, *options_.snapshot_path);
}

void LabelService::install_routes() {
  auto& srv = *server_;
  const std::string hash = session_.config_hash();

  auto preview = [this](NodeId id) {
    nlohmann::json row = nlohmann::json::array();
    const auto& f = *options_.preview_features;
    auto r = f.row(id);
    for (std::size_t c = 0; c < std::min(options_.preview_dims, r.size()); ++c) row.push_back(r[c]);
    return row;
  };

  srv.Get("/api/session", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, session_view());
  });

  srv.Get("/api/query", [this, hash, preview](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex_);
    const auto& q = session_.pending();
    nlohmann::json body{{"config_hash", hash},
                        {"iteration", q.iteration},
                        {"method", q.method},
                        {"ids", q.ids},
                        {"outstanding", session_.outstanding()},
                        {"done", session_.done()}};
    if (options_.preview_features) {
      nlohmann::json fp = nlohmann::json::array();
      for (NodeId id : q.ids) fp.push_back(preview(id));
      body["features_preview"] = fp;
    }
    if (!options_.image_paths.empty()) {
      nlohmann::json urls = nlohmann::json::array();
      for (NodeId id : q.ids) urls.push_back(options_.image_paths.at(id));
      body["image_urls"] = urls;
    }
    reply(res, 200, body);
  });

  srv.Post("/api/labels", [this, hash](const httplib::Request& req, httplib::Response& res) {
    std::size_t iteration = 0;
    std::vector<std::pair<NodeId, int>> labels;
    try {
      auto body = nlohmann::json::parse(req.body);
      iteration = body.at("iteration").get<std::size_t>();
      for (const auto& item : body.at("labels"))
        labels.emplace_back(item.at("id").get<NodeId>(), item.at("class").get<int>());
    } catch (const nlohmann::json::exception& e) {
      reply(res, 400, {{"config_hash", hash}, {"error", std::string("malformed request: ") + e.what()}});
      return;
    }
    std::unique_lock lock(mutex_);
    try {
      auto r = session_.submit(iteration, labels);
      persist();
      reply(res, 200,
            {{"config_hash", hash},
             {"accepted", r.accepted},
             {"outstanding", r.outstanding},
             {"advanced", r.advanced},
             {"iteration", session_.iteration()},
             {"done", session_.done()}});
    } catch (const Conflict& e) {
      reply(res, 409, {{"config_hash", hash}, {"error", e.what()}, {"iteration", session_.iteration()}});
    } catch (const InvalidInput& e) {
      reply(res, 400, {{"config_hash", hash}, {"error", e.what()}});
    }
  });

  srv.Get("/api/classes", [this, hash](const httplib::Request&, httplib::Response& res) {
    nlohmann::json classes = nlohmann::json::array();
    for (int c = 0; c < session_.n_classes(); ++c) {
      std::string name = static_cast<std::size_t>(c) < options_.class_names.size()
                             ? options_.class_names[c]
                             : "class_" + std::to_string(c);
      classes.push_back({{"id", c}, {"name", name}});
    }
    reply(res, 200, {{"config_hash", hash}, {"classes", classes}});
  });

  srv.Get(R"(/api/points/(\d+))", [this, hash, preview](const httplib::Request& req, httplib::Response& res) {
    unsigned long long raw = std::stoull(req.matches[1].str());
    std::shared_lock lock(mutex_);
    if (raw >= session_.graph().n_nodes()) {
      reply(res, 404, {{"config_hash", hash}, {"error", "no such point"}});
      return;
    }
    auto id = static_cast<NodeId>(raw);
    nlohmann::json body{{"config_hash", hash}, {"id", id}};
    const auto& lab = session_.labeled();
    auto it = std::find(lab.ids.begin(), lab.ids.end(), id);
    body["labeled"] = it != lab.ids.end();
    if (it != lab.ids.end()) body["class"] = lab.classes[it - lab.ids.begin()];
    const auto& q = session_.pending().ids;
    body["pending"] = std::find(q.begin(), q.end(), id) != q.end();
    if (session_.prediction()) {
      auto row = session_.prediction()->row(id);
      body["scores"] = std::vector<double>(row.begin(), row.end());
    }
    if (options_.preview_features) body["features_preview"] = preview(id);
    if (!options_.image_paths.empty()) body["image_path"] = options_.image_paths.at(id);
    reply(res, 200, body);
  });

  if (options_.ui_dir && !srv.set_mount_point("/", options_.ui_dir->string()))
    warn("UI directory " + options_.ui_dir->string() + " not found; serving the API only");
}

}  // namespace gbal
