import json
import math

import numpy as np
import pytest

import gbal


def path_graph(n):
    return gbal.Graph.from_edges(n, [(i, i + 1, 1.0, 1.0) for i in range(n - 1)])


def test_angular_distance():
    assert gbal.angular_distance([1, 0], [0, 1]) == pytest.approx(math.pi / 2)
    assert gbal.angular_distance([3, 4], [3, 4]) == 0.0
    with pytest.raises(ValueError):
        gbal.angular_distance([0, 0], [1, 0])


def test_graph_build_matches_knn():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(60, 4))
    ids, dists = gbal.knn_search(x, 5)
    assert ids.shape == (60, 5)
    assert np.all(np.diff(dists, axis=1) >= 0)
    g = gbal.build_graph(x, 5)
    offsets, targets, weights, lengths = g.csr()
    assert offsets[-1] == len(targets) == 2 * g.n_edges
    assert np.all((weights > 0) & (weights <= 1))
    tree_ids, _ = gbal.knn_search(x, 5, method="vptree")
    assert np.array_equal(ids, tree_ids)


def test_laplace_path_midpoint():
    scores = gbal.laplace_learning(path_graph(3), [0, 2], [0, 1], 2)
    assert scores.shape == (3, 2)
    assert scores[1] == pytest.approx([0.5, 0.5], abs=1e-10)
    ids, values = gbal.uncertainty(scores)
    assert values[1] == pytest.approx(1.0)


def test_spectral_acquisition_runs():
    g = path_graph(6)
    scores = gbal.laplace_learning(g, [0, 5], [0, 1], 2)
    ids, values = gbal.spectral_acquisition(g, "vopt", m=6)
    assert len(ids) == 6 and values[0] == pytest.approx(values[5])
    _, mc = gbal.spectral_acquisition(g, "mc", scores=scores)
    assert mc[0] == 0.0


def test_dac_and_ball():
    g = path_graph(10)
    assert gbal.dijkstra_ball(g, 0, 0.0) == []
    assert gbal.dijkstra_ball(g, 4, 1.5) == [3, 4, 5]
    assert gbal.density_radius(g, 0, 0.35) == 3.0
    core = gbal.dac(g, r=1.5, R=3.0, seed=1)
    assert len(core) >= 3
    assert core == gbal.dac(g, r=1.5, R=3.0, seed=1)


def test_selectors():
    q, touches = gbal.local_max_batch(path_graph(5), [0, 1, 2, 3, 4], [1, 2, 3, 2, 1], [], 3)
    assert q == [2]
    assert touches <= 3 * 2 * 5
    assert gbal.sequential_select([3, 7, 9], [0.2, 0.9, 0.9]) == [7]
    assert gbal.top_max_batch([0, 1, 2, 3], [0.1, 0.9, 0.8, 0.7], 2) == [1, 2]
    assert gbal.random_batch([1, 2, 3], 2, seed=4) == gbal.random_batch([1, 2, 3], 2, seed=4)
    assert gbal.acq_sample_batch([0, 1], [1.0, 0.0], 1) == [0]


def test_run_experiment_and_hash():
    data = gbal.make_synthetic("checkerboard", 400, seed=2)
    assert data["features"].shape == (400, 3)
    g = gbal.build_graph(data["features"], 15)
    config = {"batch_size": 10, "budget": 80, "seed": 2, "dac": {"mode": "density", "p": 0.2}}
    out = gbal.run_experiment(g, data["labels"], 2, config)
    hist = out["history"]
    assert out["status"] == "completed"
    assert hist[-1]["labels_used"] == 80
    assert all(a["labels_used"] < b["labels_used"] for a, b in zip(hist, hist[1:]))
    assert 0.0 <= out["final_accuracy"] <= 1.0
    again = gbal.run_experiment(g, data["labels"], 2, config)
    assert again["history"] == [dict(h, fit_seconds=a["fit_seconds"], selection_seconds=a["selection_seconds"])
                                for h, a in zip(hist, again["history"])]
    assert len(gbal.config_hash(config)) == 16


def test_session_round_trip():
    data = gbal.make_synthetic("two-moons", 300, seed=3)
    g = gbal.build_graph(data["features"], 12)
    labels = data["labels"]
    config = {"batch_size": 5, "budget": 60, "seed": 3, "dac": {"mode": "density", "p": 0.2}}
    s = gbal.Session(g, 2, config, truth=labels)
    s.start()
    assert s.method == "dac"
    first = s.pending
    with pytest.raises(gbal.Conflict):
        s.submit(s.iteration + 1, {first[0]: 0})
    s.submit(0, {i: labels[i] for i in first[:2]})
    snap = s.snapshot()
    resumed = gbal.Session.restore(snap, g, config, truth=labels)
    assert json.loads(snap)["config_hash"] == resumed.config_hash
    while not resumed.done:
        r = resumed.submit(resumed.iteration, {i: labels[i] for i in resumed.outstanding})
        assert r["advanced"]
    assert resumed.history[-1]["labels_used"] == 60
    assert resumed.prediction().shape == (300, 2)
