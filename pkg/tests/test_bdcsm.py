import numpy as np
import pytest

from mssc.bdcsm import ChunkPlan, run_bdcsm
from mssc.core import as_rng, child_seed, derive_rng
from mssc.lloyd import run_lloyd
from mssc.seeding import forgy_seed
from oracles import blobs


def test_chunk_plan_covers_disjointly():
    plan = ChunkPlan.build(10, 4)
    assert plan.bounds == ((0, 4), (4, 8), (8, 10))
    assert len(plan) == 3


def test_p_less_than_k_rejected():
    with pytest.raises(ValueError):
        run_bdcsm(np.zeros((10, 2)), 3, 2)


def test_two_far_pairs_split_across_chunks():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [100.0, 0.0], [101.0, 0.0]])
    for seed in range(20):
        r = run_bdcsm(X, 2, 2, rng=seed)
        assert r.extra["chunks"] == 2 and r.extra["pool_size"] == 4
        assert sorted(r.centroids[:, 0].tolist()) == [0.5, 100.5]
        assert r.objective == 1.0


def test_single_chunk_reduces_to_one_lloyd_run():
    rng0 = np.random.default_rng(0)
    X = blobs(rng0, [(0, 0), (10, 0), (0, 10)], 30)
    r = run_bdcsm(X, 3, 1000, rng=4)
    rng = as_rng(4)
    base = child_seed(rng)
    Xs = X[rng.permutation(X.shape[0])]
    ref = run_lloyd(Xs, forgy_seed(Xs, 3, derive_rng(base, 0)))
    got = sorted(map(tuple, np.round(r.centroids, 9)))
    want = sorted(map(tuple, np.round(ref.centroids, 9)))
    assert got == want
    assert r.extra["pool_size"] == 3


def test_thread_count_does_not_change_result():
    X = blobs(np.random.default_rng(1), [(0, 0), (10, 0), (0, 10), (10, 10)], 200)
    a = run_bdcsm(X, 4, 100, rng=2, threads=1)
    b = run_bdcsm(X, 4, 100, rng=2, threads=4)
    assert a.to_dict(include_timing=False) == b.to_dict(include_timing=False)
    # chunks whose Lloyd run left a cluster empty contribute fewer centroids
    assert a.extra["pool_size"] + a.extra["dropped"] == 4 * a.extra["chunks"]
    assert bool(a.flags) == (a.extra["dropped"] > 0)


def test_small_last_chunk_uses_fewer_centroids():
    X = np.random.default_rng(3).normal(size=(11, 2))
    r = run_bdcsm(X, 3, 5, rng=0)
    # chunks of 5, 5, 1 points give 3 + 3 + 1 pooled centroids
    assert r.extra["pool_size"] == 7
