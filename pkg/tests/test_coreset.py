import numpy as np
import pytest

from mssc.core import DistanceCounter, as_rng
from mssc.coreset import (
    build_lightweight_coreset,
    lightweight_probabilities,
    run_lw_coreset,
    weighted_sample_without_replacement,
)
from mssc.lloyd import run_lloyd
from mssc.seeding import kmeans_pp_seed

# q(x) for nine points on the unit square grid plus (10, 10), computed by hand
OUTLIER_X = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5], [0, 0.5], [1, 0.5], [0.5, 0], [0.5, 1],
                      [10, 10]], dtype=float)
OUTLIER_Q = [0.06270776669688728, 0.05696585071018435, 0.05696585071018435, 0.05122393472348142,
             0.05545482018736779, 0.059081293442127536, 0.0533393774554246, 0.059081293442127536,
             0.0533393774554246, 0.49184043517679055]


def test_symmetric_pair():
    q, uniform = lightweight_probabilities(np.array([[0.0, 0.0], [2.0, 0.0]]))
    assert q.tolist() == [0.5, 0.5] and not uniform


def test_outlier_has_largest_probability():
    q, _ = lightweight_probabilities(OUTLIER_X)
    assert np.allclose(q, OUTLIER_Q, rtol=1e-12)
    assert int(np.argmax(q)) == 9


def test_identical_points_fall_back_to_uniform():
    cs = build_lightweight_coreset(np.ones((6, 2)), 3, rng=0)
    assert np.allclose(cs.probabilities, 1 / 6) and cs.flags


def test_points_are_rows_and_distinct():
    X = np.random.default_rng(0).normal(size=(50, 3))
    cs = build_lightweight_coreset(X, 20, rng=1)
    assert len(set(cs.source_indices.tolist())) == 20
    assert np.array_equal(cs.points, X[cs.source_indices])


def test_single_pass_distance_count():
    X = np.random.default_rng(0).normal(size=(50, 3))
    c = DistanceCounter()
    build_lightweight_coreset(X, 20, rng=1, counter=c)
    assert c.n_d == 50


def test_single_draw_frequencies_follow_q():
    w = np.array([0.1, 0.3, 0.6])
    rng = np.random.default_rng(0)
    hits = np.bincount([weighted_sample_without_replacement(w, 1, rng)[0] for _ in range(20000)], minlength=3)
    assert np.allclose(hits / 20000, w, atol=0.015)


def test_second_draw_renormalises():
    # P(second = 2 | first = 1) = w2 / (1 - w1) under sequential renormalised draws
    w = np.array([0.1, 0.3, 0.6])
    rng = np.random.default_rng(1)
    pairs = [tuple(weighted_sample_without_replacement(w, 2, rng)) for _ in range(20000)]
    first1 = [p for p in pairs if p[0] == 1]
    frac = sum(p[1] == 2 for p in first1) / len(first1)
    assert frac == pytest.approx(0.6 / 0.7, abs=0.02)


def test_full_size_coreset_is_kmeanspp_lloyd():
    X = np.random.default_rng(2).normal(size=(40, 2))
    r = run_lw_coreset(X, 3, 40, rng=7)
    rng = as_rng(7)
    cs = build_lightweight_coreset(X, 40, rng)
    ref = run_lloyd(cs.points, kmeans_pp_seed(cs.points, 3, rng))
    assert np.array_equal(r.centroids, ref.centroids)
    assert r.objective == pytest.approx(ref.objective, rel=1e-12)


def test_two_far_singletons():
    r = run_lw_coreset(np.array([[0.0, 0.0], [50.0, 50.0]]), 2, 2, rng=0)
    assert r.objective == 0.0


def test_k_greater_than_s():
    with pytest.raises(ValueError):
        run_lw_coreset(np.zeros((10, 2)), 5, 3)
