import numpy as np
import pytest
from sklearn.cluster import DBSCAN as SkDBSCAN

from mssc.density import (
    NOISE,
    CanopyThresholds,
    DbscanParams,
    canonical_labels,
    canopy,
    dbscan,
    run_cludatase,
)
from oracles import blobs


def test_param_validation():
    with pytest.raises(ValueError):
        DbscanParams(eps=0, min_pts=2)
    with pytest.raises(ValueError):
        CanopyThresholds(t1=1.0, t2=1.0)


def test_identical_points_one_cluster():
    assert dbscan(np.ones((5, 2)), DbscanParams(0.1, 5)).tolist() == [0] * 5


def test_two_blobs_hand_reachability():
    a = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.5, 0.0]])
    X = np.vstack([a, a + 100])
    labels = dbscan(X, DbscanParams(1.0, 2))
    assert labels.tolist() == [0, 0, 0, 0, 1, 1, 1, 1]


def test_isolated_point_is_noise():
    X = np.array([[0.0, 0.0], [0.1, 0.0], [50.0, 50.0]])
    assert dbscan(X, DbscanParams(1.0, 2)).tolist() == [0, 0, NOISE]


def test_border_point_goes_to_lowest_cluster():
    # core chains on both sides of a border point at x = 5
    left = [3.0, 3.25, 3.5, 3.75, 4.0]
    X = np.array(left + [5.0] + [x + 3.0 for x in left])[:, None]
    labels = dbscan(X, DbscanParams(1.0, 4))
    assert labels.tolist() == [0] * 6 + [1] * 5
    # the same border point listed first still joins the cluster that
    # holds the lexicographically smallest core point
    perm = np.r_[5, 6:11, 0:5]
    assert dbscan(X[perm], DbscanParams(1.0, 4)).tolist() == [0] + [1] * 5 + [0] * 5


@pytest.mark.parametrize("seed", range(10))
def test_core_partition_matches_sklearn(seed):
    rng = np.random.default_rng(seed)
    X = blobs(rng, rng.uniform(-10, 10, size=(3, 2)), 30, scale=1.5)
    eps, min_pts = 0.8, 4
    ours = dbscan(X, DbscanParams(eps, min_pts))
    sk = SkDBSCAN(eps=eps, min_samples=min_pts).fit(X)
    core = np.zeros(len(X), dtype=bool)
    core[sk.core_sample_indices_] = True
    assert np.array_equal(canonical_labels(ours[core]), canonical_labels(sk.labels_[core]))
    assert np.array_equal(ours == NOISE, sk.labels_ == NOISE)


def test_canopy_examples():
    cs = canopy(np.array([[0.0], [10.0]]), CanopyThresholds(1.0, 0.5), rng=0)
    assert sorted(m.tolist() for m in cs.members) == [[0], [1]]
    X = np.array([[0.0], [0.4], [10.0]])
    for seed in range(50):
        cs = canopy(X, CanopyThresholds(1.0, 0.5), rng=seed)
        if cs.centers[0] == 0:
            assert cs.members[0].tolist() == [0, 1]
            assert len(cs) == 2 and cs.members[1].tolist() == [2]
            break
    else:
        pytest.fail("center 0 was never drawn first")


def test_canopy_loose_radius_covers_everything():
    X = np.random.default_rng(0).normal(size=(30, 2))
    diam = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1).max())
    cs = canopy(X, CanopyThresholds(diam * 1.01, 0.1), rng=3)
    assert len(cs.members[0]) == 30


def test_cludatase_two_blobs():
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal((0, 0), 0.2, size=(50, 2)), rng.normal((30, 30), 0.2, size=(50, 2))])
    r = run_cludatase(X, 2, 100, DbscanParams(2.0, 3), rng=0)
    assert r.extra["rounds"] == 1
    want = sorted(map(tuple, np.round([X[:50].mean(0), X[50:].mean(0)], 9)))
    assert sorted(map(tuple, np.round(r.centroids, 9))) == want


def test_cludatase_k1_gives_mean():
    X = np.random.default_rng(2).normal(size=(40, 2))
    r = run_cludatase(X, 1, 40, DbscanParams(10.0, 2), rng=0)
    assert np.allclose(r.centroids[0], X.mean(axis=0))


def test_cludatase_one_component_per_round():
    X = np.random.default_rng(3).normal(size=(30, 2))
    r = run_cludatase(X, 3, 30, DbscanParams(1e3, 2), rng=0)
    assert r.extra["rounds"] == 3


def test_cludatase_tops_up_when_all_noise():
    X = np.random.default_rng(4).normal(size=(30, 2)) * 100
    r = run_cludatase(X, 3, 30, DbscanParams(1e-3, 5), rng=0, max_rounds=2)
    assert r.flags and r.centroids.shape == (3, 2)
    with pytest.raises(ValueError):
        run_cludatase(X, 5, 3, DbscanParams(1.0, 2))
