"""Graph-based batch active learning."""

import json

from . import _gbal
from ._gbal import (
    Conflict,
    ConvergenceError,
    Error,
    Graph,
    InvalidInput,
    InvalidParameter,
    acq_sample_batch,
    angular_distance,
    build_graph,
    connected_components,
    dac,
    default_k,
    density_radius,
    dijkstra_ball,
    knn_search,
    laplace_learning,
    local_max_batch,
    make_synthetic,
    random_batch,
    sequential_select,
    shortest_paths,
    spectral_acquisition,
    top_max_batch,
    uncertainty,
)

__all__ = [
    "Conflict", "ConvergenceError", "Error", "Graph", "InvalidInput", "InvalidParameter", "Session",
    "acq_sample_batch", "angular_distance", "build_graph", "config_hash", "connected_components", "dac",
    "default_k", "density_radius", "dijkstra_ball", "knn_search", "laplace_learning", "local_max_batch",
    "make_synthetic", "random_batch", "run_experiment", "sequential_select", "shortest_paths",
    "spectral_acquisition", "top_max_batch", "uncertainty",
]


def _dump(config):
    if config is None:
        return ""
    return config if isinstance(config, str) else json.dumps(config)


def config_hash(config=None):
    return _gbal.config_hash(_dump(config))


def run_experiment(graph, labels, n_classes=None, config=None):
    """Runs the loop against ground-truth labels; config is a dict in the JSON config schema."""
    labels = [int(c) for c in labels]
    if n_classes is None:
        n_classes = max(labels) + 1
    out = _gbal.run_experiment(graph, labels, n_classes, _dump(config))
    out["history"] = json.loads(out["history"])
    return out


class Session:
    """Step-by-step loop for a human oracle."""

    def __init__(self, graph, n_classes, config=None, truth=None, _inner=None):
        self._config = _dump(config)
        self._graph = graph
        self._truth = None if truth is None else [int(c) for c in truth]
        self._s = _inner or _gbal.Session(graph, n_classes, self._config, self._truth)

    @classmethod
    def restore(cls, snapshot, graph, config=None, truth=None):
        truth = None if truth is None else [int(c) for c in truth]
        inner = _gbal.Session.restore(snapshot, graph, _dump(config), truth)
        return cls(graph, 0, config, truth, _inner=inner)

    def start(self):
        self._s.start()

    def submit(self, iteration, labels):
        return self._s.submit(iteration, [(int(i), int(c)) for i, c in dict(labels).items()])

    def snapshot(self):
        return self._s.snapshot()

    def prediction(self):
        return self._s.prediction()

    @property
    def history(self):
        return json.loads(self._s.history)

    def __getattr__(self, name):
        return getattr(self._s, name)
