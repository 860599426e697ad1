"""Lightweight coresets: sample points with probability mixing a uniform term
and squared distance to the data mean, then cluster the sample."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import ClusteringResult, DistanceCounter, as_dataset, as_rng, nearest, pairwise_sq
from .lloyd import DEFAULT_STOP, StopRule, run_lloyd
from .seeding import kmeans_pp_seed


@dataclass
class CoresetSample:
    points: np.ndarray
    source_indices: np.ndarray
    probabilities: np.ndarray   # q(x) for every row of the source dataset
    flags: list[str] = field(default_factory=list)


def lightweight_probabilities(X: np.ndarray, counter: DistanceCounter | None = None):
    """``q(x) = 1/(2m) + d(x, mu)^2 / (2 D)`` with ``D`` the total squared
    distance to the mean. Falls back to uniform when ``D == 0``."""
    m = X.shape[0]
    mu = X.mean(axis=0)
    d = pairwise_sq(X, mu[None, :], counter)[:, 0]
    D = float(d.sum())
    if not D > 0:
        return np.full(m, 1.0 / m), True
    return 0.5 / m + 0.5 * d / D, False


def weighted_sample_without_replacement(w: np.ndarray, s: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``s`` distinct indices as successive weighted draws with
    renormalisation would, via exponential keys (Efraimidis-Spirakis)."""
    u = rng.random(w.shape[0])
    with np.errstate(divide="ignore"):
        keys = np.log(u) / w
    order = np.argsort(-keys, kind="stable")
    return order[:s]


def build_lightweight_coreset(X, s: int, rng=None, counter: DistanceCounter | None = None) -> CoresetSample:
    X = as_dataset(X)
    m = X.shape[0]
    if not 1 <= s <= m:
        raise ValueError(f"coreset size s={s} must satisfy 1 <= s <= m={m}")
    q, uniform = lightweight_probabilities(X, counter)
    idx = weighted_sample_without_replacement(q, s, as_rng(rng))
    flags = ["all points identical; uniform probabilities used"] if uniform else []
    return CoresetSample(X[idx].copy(), idx, q, flags)


def run_lw_coreset(X, k: int, s: int, rng=None, counter: DistanceCounter | None = None,
                   stop: StopRule = DEFAULT_STOP) -> ClusteringResult:
    """K-means++-seeded Lloyd on an unweighted lightweight coreset, then a
    full assignment of ``X``."""
    X = as_dataset(X)
    if k > s:
        raise ValueError(f"k={k} exceeds coreset size s={s}")
    rng = as_rng(rng)
    counter = counter if counter is not None else DistanceCounter()
    start = counter.n_d
    t0 = time.perf_counter()
    cs = build_lightweight_coreset(X, s, rng, counter)
    C0 = kmeans_pp_seed(cs.points, k, rng, counter=counter)
    res = run_lloyd(cs.points, C0, stop, counter=counter)
    labels, mind = nearest(X, res.centroids, counter)
    return ClusteringResult(
        centroids=res.centroids,
        labels=labels,
        objective=float(mind.sum()),
        elapsed_seconds=time.perf_counter() - t0,
        n_d=counter.n_d - start,
        n_s=1,
        iterations=res.iterations,
        flags=list(cs.flags),
        extra={"coreset_objective": res.objective},
    )
