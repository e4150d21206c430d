#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gbal/config.hpp"
#include "gbal/dac.hpp"
#include "gbal/error.hpp"
#include "gbal/experiment.hpp"
#include "gbal/features.hpp"
#include "gbal/knn_graph.hpp"
#include "gbal/report.hpp"
#include "gbal/service.hpp"
#include "gbal/session.hpp"
#include "gbal/synthetic.hpp"

namespace fs = std::filesystem;
using namespace gbal;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string features;
  std::string labels;
  bool label_column = false;
  std::string synthetic;  // kind:n, e.g. checkerboard:2000
  std::string graph;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "RNG seed (overrides the config)");
  cmd->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--features", c.features, "feature matrix, CSV or GBAL binary")->check(CLI::ExistingFile);
  cmd->add_option("--labels", c.labels, "ground-truth labels CSV")->check(CLI::ExistingFile);
  cmd->add_flag("--label-column", c.label_column, "last CSV feature column holds the label");
  cmd->add_option("--synthetic", c.synthetic, "generate data instead: checkerboard|two-moons|gaussian-blobs[:N]");
  cmd->add_option("--graph", c.graph, "prebuilt graph file from build-graph")->check(CLI::ExistingFile);
}

struct Dataset {
  std::optional<FeatureMatrix> features;
  std::optional<FeatureMatrix> preview;  // planar coordinates for synthetic data
  std::optional<std::vector<int>> labels;
  int n_classes = 0;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.dac.seed = *c.seed;
    cfg.spectral.seed = *c.seed;
  }
  return cfg;
}

Dataset load_dataset(const Common& c, const ExperimentConfig& cfg) {
  Dataset d;
  if (!c.synthetic.empty()) {
    auto colon = c.synthetic.find(':');
    auto kind = parse_synthetic_kind(c.synthetic.substr(0, colon));
    std::size_t n = colon == std::string::npos ? 2000 : std::stoul(c.synthetic.substr(colon + 1));
    auto s = make_synthetic(kind, n, cfg.seed);
    d.features = std::move(s.features);
    d.preview = std::move(s.coords);
    d.labels = std::move(s.labels);
    d.n_classes = s.n_classes;
    return d;
  }
  if (!c.features.empty()) {
    auto lf = read_features(c.features, c.label_column);
    d.features = std::move(lf.features);
    d.labels = std::move(lf.labels);
  }
  if (!c.labels.empty()) d.labels = read_labels_csv(c.labels);
  if (d.labels) {
    int top = -1;
    for (int v : *d.labels) top = std::max(top, v);
    d.n_classes = top + 1;
  }
  return d;
}

std::shared_ptr<const SimilarityGraph> load_graph(const Common& c, const ExperimentConfig& cfg, const Dataset& d) {
  if (!c.graph.empty()) return std::make_shared<const SimilarityGraph>(read_graph(c.graph));
  if (!d.features) throw InvalidInput("need --features, --synthetic or --graph");
  return std::make_shared<const SimilarityGraph>(build_similarity_graph(*d.features, cfg));
}

void check_labels(const Dataset& d, const SimilarityGraph& g) {
  if (d.labels && d.labels->size() != g.n_nodes())
    throw InvalidInput("label count " + std::to_string(d.labels->size()) + " does not match " +
                       std::to_string(g.n_nodes()) + " nodes");
}

LabelService* active_service = nullptr;

void handle_signal(int) {
  if (active_service) active_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based batch active learning"};
  app.require_subcommand(1);

  Common common;

  auto* bg = app.add_subcommand("build-graph", "build the KNN similarity graph");
  add_common(bg, common);
  std::string graph_out;
  std::string knn_method = "exact";
  std::optional<std::size_t> knn_k;
  bg->add_option("--out,-o", graph_out, "output graph file")->required();
  bg->add_option("--k", knn_k, "neighbors per node (default 50, or N/10 for small N)");
  bg->add_option("--method", knn_method, "exact|vptree")->check(CLI::IsMember({"exact", "vptree"}));

  auto* cs = app.add_subcommand("coreset", "compute the DAC core-set");
  add_common(cs, common);
  std::string core_out;
  cs->add_option("--out,-o", core_out, "write core-set ids here instead of stdout");

  auto* run = app.add_subcommand("run", "run an active-learning experiment against ground truth");
  add_common(run, common);
  std::string history_out, prediction_out;
  std::optional<std::string> selector, acquisition;
  std::optional<std::size_t> budget, batch;
  run->add_option("--out,-o", history_out, "history JSON output");
  run->add_option("--predictions", prediction_out, "final prediction CSV output");
  run->add_option("--selector", selector, "localmax|sequential|random|topmax|acqsample");
  run->add_option("--acquisition", acquisition, "uc|vopt|mc|mcvopt");
  run->add_option("--budget", budget, "total label budget, core-set included");
  run->add_option("--batch-size", batch, "batch size B");

  auto* srv = app.add_subcommand("serve", "serve the labeling API for a human oracle");
  add_common(srv, common);
  std::string host = "127.0.0.1", snapshot, ui_dir, resume;
  int port = 8080;
  int n_classes_opt = 0;
  std::vector<std::string> class_names;
  srv->add_option("--host", host, "bind address");
  srv->add_option("--port", port, "bind port, 0 for any free port");
  srv->add_option("--snapshot", snapshot, "session snapshot path, rewritten after each submission");
  srv->add_option("--resume", resume, "resume from a snapshot")->check(CLI::ExistingFile);
  srv->add_option("--ui-dir", ui_dir, "static UI directory served at /");
  srv->add_option("--classes", n_classes_opt, "number of classes when no labels are given");
  srv->add_option("--class-names", class_names, "class display names")->delimiter(',');

  auto* rep = app.add_subcommand("report", "write curve and summary tables from history files");
  add_common(rep, common);
  std::vector<std::string> histories;
  std::string curve_csv, summary_csv, curve_out_json;
  rep->add_option("histories", histories, "history JSON files from `run`")->required()->check(CLI::ExistingFile);
  rep->add_option("--curve", curve_csv, "accuracy-vs-labels CSV");
  rep->add_option("--curve-json", curve_out_json, "accuracy-vs-labels JSON");
  rep->add_option("--summary", summary_csv, "time/accuracy table CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = load(common);

    if (*bg) {
      if (knn_k) cfg.knn_k = *knn_k;
      cfg.knn_method = knn_method == "vptree" ? KnnMethod::vptree : KnnMethod::exact;
      auto d = load_dataset(common, cfg);
      if (!d.features) throw InvalidInput("need --features or --synthetic");
      auto g = build_similarity_graph(*d.features, cfg);
      write_graph(graph_out, g);
      std::cout << "nodes " << g.n_nodes() << " edges " << g.n_edges() << " k " << g.knn_k() << " components "
                << connected_components(g).count << "\n";
      return 0;
    }

    if (*cs) {
      auto d = load_dataset(common, cfg);
      auto g = load_graph(common, cfg, d);
      DacParams p = cfg.dac;
      p.seed = cfg.seed;
      auto res = dac(*g, cfg.initial_labeled, p);
      std::ofstream file;
      if (!core_out.empty()) file.open(core_out);
      std::ostream& out = core_out.empty() ? std::cout : file;
      for (NodeId id : res.core) out << id << "\n";
      std::cerr << "core-set size " << res.core.size() << " of " << g->n_nodes() << "\n";
      return 0;
    }

    if (*run) {
      if (selector) cfg.selector = parse_selector(*selector);
      if (acquisition) cfg.acquisition = parse_acquisition(*acquisition);
      if (budget) cfg.budget = *budget;
      if (batch) cfg.batch_size = *batch;
      auto d = load_dataset(common, cfg);
      if (!d.labels) throw InvalidInput("run needs ground-truth labels (--labels, --label-column or --synthetic)");
      auto g = load_graph(common, cfg, d);
      check_labels(d, *g);
      cfg.validate(g->n_nodes());
      GroundTruthOracle oracle(*d.labels);
      auto res = run_experiment(cfg, g, oracle, d.n_classes, d.labels);
      nlohmann::json out{{"method", to_string(cfg.selector)},
                         {"acquisition", to_string(cfg.acquisition)},
                         {"config_hash", cfg.hash()},
                         {"history", res.history}};
      if (!history_out.empty()) {
        std::ofstream(history_out) << out.dump(2) << "\n";
      }
      if (!prediction_out.empty()) {
        auto pred = Session::restore(res.snapshot, cfg, g, d.labels).prediction();
        if (pred) write_prediction_csv(prediction_out, *pred);
      }
      const auto& last = res.history.back();
      std::cout << "method " << to_string(cfg.selector) << " labels " << last.labels_used << " cycles "
                << res.selection_cycles << " accuracy " << nlohmann::json(*last.accuracy).dump() << " time "
                << nlohmann::json(res.selection_seconds + res.fit_seconds).dump() << "\n";
      return 0;
    }

    if (*srv) {
      auto d = load_dataset(common, cfg);
      auto g = load_graph(common, cfg, d);
      check_labels(d, *g);
      int nc = d.n_classes ? d.n_classes : n_classes_opt;
      if (nc == 0) nc = static_cast<int>(class_names.size());
      if (nc < 1) throw InvalidInput("give --labels, --classes or --class-names");
      ServiceOptions opts;
      opts.class_names = class_names;
      if (d.preview) opts.preview_features = *d.preview;
      else if (d.features) opts.preview_features = *d.features;
      if (!snapshot.empty()) opts.snapshot_path = snapshot;
      if (!ui_dir.empty()) opts.ui_dir = ui_dir;
      std::optional<Session> session;
      if (!resume.empty()) {
        std::ifstream in(resume);
        session.emplace(Session::restore(nlohmann::json::parse(in), cfg, g, d.labels));
      } else {
        session.emplace(cfg, g, nc, d.labels);
      }
      LabelService service(std::move(*session), opts);
      int bound = service.bind(host, port);
      std::cout << "listening on http://" << host << ":" << bound << "/api" << std::endl;
      active_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      service.serve();
      active_service = nullptr;
      return 0;
    }

    if (*rep) {
      std::vector<MethodHistory> runs;
      std::vector<SummaryRow> rows;
      for (const auto& path : histories) {
        runs.push_back(load_history_json(path, fs::path(path).stem().string()));
        rows.push_back(summarize(runs.back()));
      }
      if (!curve_csv.empty()) write_curve_csv(curve_csv, runs);
      if (!curve_out_json.empty()) std::ofstream(curve_out_json) << curve_json(runs).dump(2) << "\n";
      if (!summary_csv.empty()) {
        write_summary_csv(summary_csv, rows);
      } else {
        std::cout << "method,time,accuracy\n";
        for (const auto& r : rows)
          std::cout << r.method << ',' << nlohmann::json(r.time_seconds).dump() << ','
                    << (r.accuracy ? nlohmann::json(*r.accuracy).dump() : "") << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
