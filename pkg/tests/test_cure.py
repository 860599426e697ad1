import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage

from mssc.cure import (
    CureParams,
    RepCluster,
    centroid_linkage,
    cluster_partition,
    merge_pool,
    run_cure,
    scattered_reps,
)
from oracles import blobs


def _scipy_centroid_partition(P, target):
    """Replay scipy's centroid-linkage merges until ``target`` clusters remain."""
    m = P.shape[0]
    Z = linkage(P, method="centroid")
    members = {i: {i} for i in range(m)}
    for step, (a, b, _, _) in enumerate(Z[: m - target]):
        members[m + step] = members.pop(int(a)) | members.pop(int(b))
    return sorted(sorted(s) for s in members.values())


def _partition(labels):
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    return sorted(groups.values())


@pytest.mark.parametrize("seed", range(8))
def test_centroid_linkage_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(int(rng.integers(8, 40)), 2))
    target = int(rng.integers(1, 6))
    assert _partition(centroid_linkage(P, target)) == _scipy_centroid_partition(P, target)


def test_params_validation_and_partitions():
    with pytest.raises(ValueError):
        CureParams(k=2, s=10, alpha=1.5)
    with pytest.raises(ValueError):
        CureParams(k=2, s=10, c=0)
    assert CureParams(k=2, s=100, f=3, q=3).partitions == 5
    assert CureParams(k=5, s=10).partitions == 1


def test_infeasible_partition_names_inequality():
    X = np.random.default_rng(0).normal(size=(20, 2))
    with pytest.raises(ValueError, match=r"q\*k"):
        run_cure(X, CureParams(k=4, s=10, q=3), rng=0)


def test_two_far_pairs():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 0.0]])
    for seed in range(5):
        r = run_cure(X, CureParams(k=2, s=4, f=1, q=1, c=2, alpha=0.3), rng=seed)
        assert r.objective == 1.0
        assert sorted(r.centroids[:, 0].tolist()) == [0.5, 10.5]


def test_alpha_one_collapses_reps_to_centroid():
    members = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
    c = members.mean(axis=0)
    reps = scattered_reps(members, c, 3, 1.0)
    assert np.allclose(reps, c)


def test_alpha_zero_keeps_sample_points():
    members = np.random.default_rng(1).normal(size=(9, 2))
    reps = scattered_reps(members, members.mean(axis=0), 4, 0.0)
    assert all(any(np.array_equal(r, x) for x in members) for r in reps)


def test_reps_lie_on_segment_and_count_capped():
    rng = np.random.default_rng(2)
    members = rng.normal(size=(3, 2))
    c = members.mean(axis=0)
    reps = scattered_reps(members, c, 10, 0.4)
    assert reps.shape[0] == 3
    # each rep is 0.6 * x + 0.4 * c for some member x
    back = (reps - 0.4 * c) / 0.6
    assert all(np.min(np.abs(members - b).sum(axis=1)) < 1e-12 for b in back)


def test_p1_q1_c1_alpha1_is_centroid_agglomeration():
    rng = np.random.default_rng(3)
    P = blobs(rng, [(0, 0), (8, 0), (0, 8)], 10)
    params = CureParams(k=3, s=P.shape[0], f=P.shape[0], q=1, c=1, alpha=1.0)
    clusters = cluster_partition(P, params)
    final, heights = merge_pool(clusters, 3, params)
    assert heights == []
    labels = centroid_linkage(P, 3)
    want = sorted(tuple(np.round(P[labels == j].mean(axis=0), 12)) for j in range(3))
    got = sorted(tuple(np.round(c.reps[0], 12)) for c in final)
    assert got == want


def test_single_linkage_pool_merges_are_monotone():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        P = rng.normal(size=(25, 2))
        params = CureParams(k=2, s=25, c=25, alpha=0.0)
        singles = [RepCluster(p.copy(), p[None, :].copy(), p[None, :].copy()) for p in P]
        _, heights = merge_pool(singles, 2, params)
        assert all(b >= a for a, b in zip(heights, heights[1:]))


def test_exactly_k_clusters_and_consistent_objective():
    rng = np.random.default_rng(4)
    X = blobs(rng, [(0, 0), (20, 0), (0, 20), (20, 20)], 100)
    r = run_cure(X, CureParams(k=4, s=200), rng=0)
    assert r.centroids.shape == (4, 2)
    d = ((X[:, None] - r.centroids[None]) ** 2).sum(-1).min(1).sum()
    assert r.objective == pytest.approx(d)
