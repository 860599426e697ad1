import numpy as np
import pytest

from mssc.accel import exclusion_test, run_ikmeans
from mssc.core import DistanceCounter
from mssc.lloyd import StopRule, run_lloyd
from mssc.seeding import forgy_seed
from oracles import blobs


def _instances(n):
    for s in range(n):
        rng = np.random.default_rng(s)
        m, k = int(rng.integers(30, 300)), int(rng.integers(2, 8))
        X = blobs(rng, rng.uniform(-20, 20, size=(k, 2)), m // k + 1, scale=rng.uniform(0.5, 4))
        yield X, k, forgy_seed(X, k, rng)


def test_exclusion_modes():
    d1, d2 = np.array([1.0]), np.array([4.0])
    s = np.array([1.0])
    assert exclusion_test(d1, d2, s, s, "verbatim")[0]            # |1-4| = 3 > 2
    assert not exclusion_test(d1, d2, s, s, "strict-elkan")[0]    # 2-1 = 1 < 2
    assert not exclusion_test(d1, d2, s, s, "off")[0]
    with pytest.raises(ValueError):
        exclusion_test(d1, d2, s, s, "loose")


def test_off_mode_is_plain_lloyd():
    for X, k, C0 in _instances(30):
        a = run_ikmeans(X, k, C0=C0, exclusion="off")
        b = run_lloyd(X, C0)
        assert np.array_equal(a.centroids, b.centroids)
        assert a.objective == b.objective and a.n_d == b.n_d and a.iterations == b.iterations


def test_counter_never_exceeds_lloyd_bound():
    for X, k, C0 in _instances(60):
        for mode in ("verbatim", "strict-elkan"):
            c = DistanceCounter()
            r = run_ikmeans(X, k, C0=C0, exclusion=mode, counter=c)
            assert c.n_d == r.n_d <= r.iterations * X.shape[0] * k
            assert r.n_d <= run_lloyd(X, C0).n_d


def test_reported_objective_is_exact():
    for X, k, C0 in _instances(20):
        r = run_ikmeans(X, k, C0=C0)
        d = ((X[:, None] - r.centroids[None]) ** 2).sum(-1).min(1).sum()
        assert r.objective == pytest.approx(d, rel=1e-12)


def test_recheck_period_validation():
    X = np.random.default_rng(0).normal(size=(10, 2))
    with pytest.raises(ValueError):
        run_ikmeans(X, 2, rng=0, recheck_period=0)
    with pytest.raises(ValueError):
        run_ikmeans(X, 2, rng=0, exclusion="nope")


def test_two_far_pairs():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 0.0]])
    r = run_ikmeans(X, 2, C0=np.array([[0.0, 0.0], [11.0, 0.0]]))
    assert r.objective == 1.0
