#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gbal/acquisition.hpp"
#include "gbal/batch_select.hpp"
#include "gbal/config.hpp"
#include "gbal/dac.hpp"
#include "gbal/error.hpp"
#include "gbal/experiment.hpp"
#include "gbal/knn_graph.hpp"
#include "gbal/laplace.hpp"
#include "gbal/session.hpp"
#include "gbal/synthetic.hpp"

namespace py = pybind11;
using namespace gbal;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using GraphPtr = std::shared_ptr<SimilarityGraph>;

FeatureMatrix to_features(const DoubleArray& a) {
  if (a.ndim() != 2) throw InvalidInput("features must be a 2-D array");
  auto n = static_cast<std::size_t>(a.shape(0)), d = static_cast<std::size_t>(a.shape(1));
  return FeatureMatrix(n, d, std::vector<double>(a.data(), a.data() + n * d));
}

py::array_t<double> to_array(const FeatureMatrix& f) {
  py::array_t<double> out({f.n_points(), f.dim()});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

py::array_t<double> to_array(const Prediction& p) {
  py::array_t<double> out({p.n_nodes(), static_cast<std::size_t>(p.n_classes())});
  std::copy(p.scores().begin(), p.scores().end(), out.mutable_data());
  return out;
}

Prediction to_prediction(const DoubleArray& a) {
  if (a.ndim() != 2) throw InvalidInput("scores must be a 2-D array");
  auto n = static_cast<std::size_t>(a.shape(0));
  auto c = static_cast<int>(a.shape(1));
  return Prediction(n, c, std::vector<double>(a.data(), a.data() + n * c));
}

std::vector<NodeId> all_or(const std::optional<std::vector<NodeId>>& ids, std::size_t n) {
  if (ids) return *ids;
  std::vector<NodeId> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<NodeId>(i);
  return out;
}

py::tuple acq_tuple(const AcquisitionVector& a) {
  return py::make_tuple(std::vector<NodeId>(a.ids().begin(), a.ids().end()),
                        std::vector<double>(a.values().begin(), a.values().end()));
}

KnnMethod parse_method(const std::string& m) {
  if (m == "exact") return KnnMethod::exact;
  if (m == "vptree") return KnnMethod::vptree;
  throw InvalidParameter("unknown knn method '" + m + "'");
}

ExperimentConfig parse_config(const std::string& json) {
  return json.empty() ? ExperimentConfig{} : nlohmann::json::parse(json).get<ExperimentConfig>();
}

py::dict result_dict(const ExperimentResult& r) {
  py::dict d;
  d["status"] = r.status == RunStatus::completed ? "completed" : "paused";
  d["history"] = nlohmann::json(r.history).dump();
  d["core"] = r.core;
  d["selection_cycles"] = r.selection_cycles;
  d["fits"] = r.fits;
  d["selection_seconds"] = r.selection_seconds;
  d["fit_seconds"] = r.fit_seconds;
  d["final_accuracy"] = r.final_accuracy;
  d["snapshot"] = r.snapshot.dump();
  return d;
}

DacParams dac_params(std::optional<double> r, std::optional<double> R, std::optional<double> p,
                     std::uint64_t seed) {
  DacParams params;
  params.seed = seed;
  if (r || R) {
    if (!r || !R) throw InvalidParameter("fixed radii need both r and R");
    params.radii = FixedRadii{*r, *R};
  } else {
    params.radii = DensityRadii{p.value_or(0.05)};
  }
  return params;
}

}  // namespace

PYBIND11_MODULE(_gbal, m) {
  m.doc() = "Graph-based batch active learning core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<Conflict>(m, "Conflict", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  py::class_<SimilarityGraph, GraphPtr>(m, "Graph")
      .def_property_readonly("n_nodes", &SimilarityGraph::n_nodes)
      .def_property_readonly("n_edges", &SimilarityGraph::n_edges)
      .def_property_readonly("knn_k", &SimilarityGraph::knn_k)
      .def("weight", &SimilarityGraph::weight)
      .def("degree", &SimilarityGraph::weighted_degree)
      .def("neighbors",
           [](const SimilarityGraph& g, std::size_t i) {
             if (i >= g.n_nodes()) throw InvalidInput("node out of range");
             std::vector<std::tuple<NodeId, double, double>> out;
             for (const Edge& e : g.neighbors(i)) out.emplace_back(e.target, e.weight, e.length);
             return out;
           })
      .def("csr",
           [](const SimilarityGraph& g) {
             std::vector<NodeId> targets;
             std::vector<double> weights, lengths;
             for (const Edge& e : g.edges()) {
               targets.push_back(e.target);
               weights.push_back(e.weight);
               lengths.push_back(e.length);
             }
             return py::make_tuple(py::array(py::cast(g.offsets())), py::array(py::cast(targets)),
                                   py::array(py::cast(weights)), py::array(py::cast(lengths)));
           },
           "(offsets, targets, weights, lengths) arrays")
      .def("save", [](const SimilarityGraph& g, const std::string& path) { write_graph(path, g); })
      .def_static("load", [](const std::string& path) { return std::make_shared<SimilarityGraph>(read_graph(path)); })
      .def_static(
          "from_edges",
          [](std::size_t n, const std::vector<std::tuple<NodeId, NodeId, double, double>>& edges) {
            return std::make_shared<SimilarityGraph>(SimilarityGraph::from_edges(n, edges));
          },
          py::arg("n"), py::arg("edges"));

  m.def("angular_distance", [](const std::vector<double>& x, const std::vector<double>& y) {
    return angular_distance(x, y);
  });

  m.def(
      "knn_search",
      [](const DoubleArray& features, std::size_t k, const std::string& method) {
        auto idx = knn_search(to_features(features), k, parse_method(method));
        py::array_t<NodeId> ids({idx.n_nodes(), idx.k()});
        py::array_t<double> dists({idx.n_nodes(), idx.k()});
        for (std::size_t i = 0; i < idx.n_nodes(); ++i)
          for (std::size_t j = 0; j < idx.k(); ++j) {
            ids.mutable_at(i, j) = idx.neighbors(i)[j];
            dists.mutable_at(i, j) = idx.distances(i)[j];
          }
        return py::make_tuple(ids, dists);
      },
      py::arg("features"), py::arg("k"), py::arg("method") = "exact");

  m.def(
      "build_graph",
      [](const DoubleArray& features, std::size_t k, const std::string& method) -> GraphPtr {
        auto f = to_features(features);
        if (k == 0) k = default_k(f.n_points());
        return std::make_shared<SimilarityGraph>(build_graph(knn_search(f, k, parse_method(method))));
      },
      py::arg("features"), py::arg("k") = 0, py::arg("method") = "exact");

  m.def("default_k", &default_k);

  m.def("connected_components", [](const SimilarityGraph& g) { return connected_components(g).component; });

  m.def(
      "laplace_learning",
      [](const SimilarityGraph& g, const std::vector<NodeId>& ids, const std::vector<int>& classes, int n_classes,
         double tol, std::size_t max_iter) {
        if (ids.size() != classes.size()) throw InvalidInput("ids and classes differ in length");
        LabelState labels{n_classes, ids, classes};
        return to_array(laplace_learning(g, labels, LaplaceOptions{tol, max_iter}));
      },
      py::arg("graph"), py::arg("ids"), py::arg("classes"), py::arg("n_classes"), py::arg("tol") = 1e-8,
      py::arg("max_iter") = 0);

  m.def(
      "uncertainty",
      [](const DoubleArray& scores, std::optional<std::vector<NodeId>> candidates) {
        auto pred = to_prediction(scores);
        return acq_tuple(uncertainty(pred, all_or(candidates, pred.n_nodes())));
      },
      py::arg("scores"), py::arg("candidates") = py::none());

  m.def(
      "spectral_acquisition",
      [](const SimilarityGraph& g, const std::string& name, std::optional<DoubleArray> scores,
         std::optional<std::vector<NodeId>> candidates, std::size_t m_eig, double tau, double gamma2,
         std::uint64_t seed) {
        SpectralOptions opts{m_eig, tau, gamma2, seed};
        auto cache = spectral_decompose(g, opts);
        auto ids = all_or(candidates, g.n_nodes());
        auto kind = parse_acquisition(name);
        if (kind == AcquisitionKind::vopt) return acq_tuple(vopt(cache, ids));
        if (!scores) throw InvalidInput(name + " needs prediction scores");
        auto pred = to_prediction(*scores);
        if (kind == AcquisitionKind::mc) return acq_tuple(model_change(cache, pred, ids));
        if (kind == AcquisitionKind::mcvopt) return acq_tuple(mc_vopt(cache, pred, ids));
        return acq_tuple(uncertainty(pred, ids));
      },
      py::arg("graph"), py::arg("name"), py::arg("scores") = py::none(), py::arg("candidates") = py::none(),
      py::arg("m") = 0, py::arg("tau") = 0.1, py::arg("gamma2") = 0.01, py::arg("seed") = 0);

  m.def("dijkstra_ball", &dijkstra_ball, py::arg("graph"), py::arg("source"), py::arg("radius"));
  m.def("shortest_paths", &shortest_paths, py::arg("graph"), py::arg("source"));
  m.def("density_radius", &density_radius, py::arg("graph"), py::arg("source"), py::arg("p"));

  m.def(
      "dac",
      [](const SimilarityGraph& g, const std::vector<NodeId>& initial, std::optional<double> r,
         std::optional<double> R, std::optional<double> p, std::uint64_t seed) {
        return dac(g, initial, dac_params(r, R, p, seed)).core;
      },
      py::arg("graph"), py::arg("initial") = std::vector<NodeId>{}, py::arg("r") = py::none(),
      py::arg("R") = py::none(), py::arg("p") = py::none(), py::arg("seed") = 0);

  m.def(
      "local_max_batch",
      [](const SimilarityGraph& g, const std::vector<NodeId>& ids, const std::vector<double>& values,
         const std::vector<NodeId>& labeled, std::size_t b) {
        LocalMaxStats stats;
        auto q = local_max_batch(g, AcquisitionVector(ids, values), labeled, b, &stats);
        return py::make_tuple(q.ids, stats.adjacency_touches);
      },
      py::arg("graph"), py::arg("ids"), py::arg("values"), py::arg("labeled"), py::arg("batch_size"),
      "(query ids, adjacency touches)");
  m.def("sequential_select", [](const std::vector<NodeId>& ids, const std::vector<double>& values) {
    return sequential_select(AcquisitionVector(ids, values)).ids;
  });
  m.def("top_max_batch", [](const std::vector<NodeId>& ids, const std::vector<double>& values, std::size_t b) {
    return top_max_batch(AcquisitionVector(ids, values), b).ids;
  });
  m.def(
      "random_batch",
      [](const std::vector<NodeId>& candidates, std::size_t b, std::uint64_t seed) {
        Rng rng(seed);
        return random_batch(candidates, b, rng).ids;
      },
      py::arg("candidates"), py::arg("batch_size"), py::arg("seed") = 0);
  m.def(
      "acq_sample_batch",
      [](const std::vector<NodeId>& ids, const std::vector<double>& values, std::size_t b, std::uint64_t seed) {
        Rng rng(seed);
        return acq_sample_batch(AcquisitionVector(ids, values), b, rng).ids;
      },
      py::arg("ids"), py::arg("values"), py::arg("batch_size"), py::arg("seed") = 0);

  m.def(
      "make_synthetic",
      [](const std::string& kind, std::size_t n, std::uint64_t seed) {
        auto s = make_synthetic(parse_synthetic_kind(kind), n, seed);
        py::dict d;
        d["features"] = to_array(s.features);
        d["coords"] = to_array(s.coords);
        d["labels"] = py::array(py::cast(s.labels));
        d["n_classes"] = s.n_classes;
        return d;
      },
      py::arg("kind"), py::arg("n"), py::arg("seed") = 0);

  m.def("config_hash", [](const std::string& json) { return parse_config(json).hash(); });
  m.def("normalize_config", [](const std::string& json) { return nlohmann::json(parse_config(json)).dump(); });

  m.def(
      "run_experiment",
      [](GraphPtr g, const std::vector<int>& labels, int n_classes, const std::string& config) {
        auto cfg = parse_config(config);
        cfg.validate(g->n_nodes());
        GroundTruthOracle oracle(labels);
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg, std::move(g), oracle, n_classes, labels);
        }
        return result_dict(res);
      },
      py::arg("graph"), py::arg("labels"), py::arg("n_classes"), py::arg("config") = "");

  py::class_<Session>(m, "Session")
      .def(py::init([](GraphPtr g, int n_classes, const std::string& config, std::optional<std::vector<int>> truth) {
             return Session(parse_config(config), std::move(g), n_classes, std::move(truth));
           }),
           py::arg("graph"), py::arg("n_classes"), py::arg("config") = "", py::arg("truth") = py::none())
      .def_static(
          "restore",
          [](const std::string& snapshot, GraphPtr g, const std::string& config,
             std::optional<std::vector<int>> truth) {
            return Session::restore(nlohmann::json::parse(snapshot), parse_config(config), std::move(g),
                                    std::move(truth));
          },
          py::arg("snapshot"), py::arg("graph"), py::arg("config") = "", py::arg("truth") = py::none())
      .def("start", &Session::start)
      .def(
          "submit",
          [](Session& s, std::size_t iteration, const std::vector<std::pair<NodeId, int>>& labels) {
            auto r = s.submit(iteration, labels);
            py::dict d;
            d["accepted"] = r.accepted;
            d["outstanding"] = r.outstanding;
            d["advanced"] = r.advanced;
            return d;
          },
          py::arg("iteration"), py::arg("labels"))
      .def_property_readonly("iteration", &Session::iteration)
      .def_property_readonly("pending", [](const Session& s) { return s.pending().ids; })
      .def_property_readonly("method", [](const Session& s) { return s.pending().method; })
      .def_property_readonly("outstanding", &Session::outstanding)
      .def_property_readonly("done", &Session::done)
      .def_property_readonly("budget", &Session::budget)
      .def_property_readonly("core_set", &Session::core_set)
      .def_property_readonly("labeled", [](const Session& s) { return py::make_tuple(s.labeled().ids, s.labeled().classes); })
      .def_property_readonly("history", [](const Session& s) { return nlohmann::json(s.history()).dump(); })
      .def_property_readonly("config_hash", &Session::config_hash)
      .def("prediction",
           [](const Session& s) -> std::optional<py::array_t<double>> {
             if (!s.prediction()) return std::nullopt;
             return to_array(*s.prediction());
           })
      .def("snapshot", [](const Session& s) { return s.snapshot().dump(); });
}
