import numpy as np
import pytest

from mssc.core import DistanceCounter
from mssc.lloyd import StopRule, run_lloyd
from mssc.seeding import forgy_seed
from oracles import blobs


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        StopRule(max_iters=0)
    with pytest.raises(ValueError):
        StopRule(rel_tol=-1)


def test_k1_converges_to_mean():
    X = np.array([[0.0, 0.0], [2.0, 0.0], [4.0, 6.0]])
    res = run_lloyd(X, X[:1])
    assert np.allclose(res.centroids[0], X.mean(axis=0))
    assert res.objective == pytest.approx(((X - X.mean(axis=0)) ** 2).sum())


def test_two_pairs_hand_trace():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 0.0]])
    res = run_lloyd(X, np.array([[0.0, 0.0], [10.0, 0.0]]))
    assert res.objective == 1.0
    assert sorted(res.centroids[:, 0].tolist()) == [0.5, 10.5]


def test_counter_exact_and_objective_belongs_to_centroids():
    rng = np.random.default_rng(0)
    X = blobs(rng, [(0, 0), (5, 5), (0, 8)], 40)
    c = DistanceCounter()
    res = run_lloyd(X, forgy_seed(X, 3, rng), counter=c)
    assert c.n_d == res.n_d == res.iterations * X.shape[0] * 3
    d = ((X[:, None] - res.centroids[None]) ** 2).sum(-1).min(1).sum()
    assert res.objective == pytest.approx(d)


def test_max_iters_respected():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(200, 2))
    res = run_lloyd(X, forgy_seed(X, 8, rng), StopRule(max_iters=2, rel_tol=0.0))
    assert res.iterations == 2 and res.extra["stop_reason"] == "max_iters"


def test_reseed_farthest_point_fills_empty():
    X = np.array([[0.0], [1.0], [10.0]])
    C0 = np.array([[0.5], [100.0], [10.0]])
    res = run_lloyd(X, C0, empty_policy="reseed-farthest-point")
    assert any("reseeded" in f for f in res.flags)
    keep = run_lloyd(X, C0, empty_policy="keep-previous")
    assert keep.centroids[1, 0] == 100.0


def test_unknown_empty_policy():
    with pytest.raises(ValueError):
        run_lloyd(np.zeros((2, 1)), np.zeros((1, 1)), empty_policy="drop")


def test_trace_is_non_increasing():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(300, 3))
    trace = []
    run_lloyd(X, forgy_seed(X, 6, rng), StopRule(300, 0.0), trace=trace)
    assert all(b <= a for a, b in zip(trace, trace[1:]))
