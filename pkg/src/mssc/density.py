"""DBSCAN, canopy pre-clustering and the DBSCAN-seeded CluDataSE pipeline."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ClusteringResult,
    DistanceCounter,
    as_dataset,
    as_rng,
    pairwise_sq,
)
from .lloyd import DEFAULT_STOP, StopRule, run_lloyd
from .seeding import kmeanspp_indices

NOISE = -1
_CHUNK = 2048


@dataclass(frozen=True)
class DbscanParams:
    eps: float
    min_pts: int

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be >= 1")


@dataclass(frozen=True)
class CanopyThresholds:
    t1: float
    t2: float

    def __post_init__(self):
        if not self.t1 > self.t2 > 0:
            raise ValueError(f"canopy thresholds need t1 > t2 > 0, got t1={self.t1}, t2={self.t2}")


@dataclass
class CanopySet:
    centers: list[int] = field(default_factory=list)
    members: list[np.ndarray] = field(default_factory=list)

    @property
    def canopies(self) -> list[tuple[int, np.ndarray]]:
        return list(zip(self.centers, self.members))

    def __len__(self) -> int:
        return len(self.centers)


def _neighbours(X: np.ndarray, eps2: float, counter: DistanceCounter | None):
    m = X.shape[0]
    out = []
    for lo in range(0, m, _CHUNK):
        D = pairwise_sq(X[lo:lo + _CHUNK], X, counter)
        out.extend(np.flatnonzero(row <= eps2) for row in D)
    return out


def dbscan(X, params: DbscanParams, counter: DistanceCounter | None = None) -> np.ndarray:
    """Brute-force DBSCAN. Neighbourhoods include the point itself.

    Clusters are numbered by their lexicographically smallest core point and
    a border point reachable from several clusters joins the lowest-numbered
    one, so the partition does not depend on row order. Noise is ``-1``.
    """
    X = as_dataset(X)
    m = X.shape[0]
    nbrs = _neighbours(X, params.eps * params.eps, counter)
    core = np.array([len(nb) >= params.min_pts for nb in nbrs], dtype=bool)
    comp = np.full(m, NOISE, dtype=np.intp)
    n_comp = 0
    for i in np.flatnonzero(core):
        if comp[i] != NOISE:
            continue
        comp[i] = n_comp
        stack = [i]
        while stack:
            p = stack.pop()
            for q in nbrs[p]:
                if core[q] and comp[q] == NOISE:
                    comp[q] = n_comp
                    stack.append(q)
        n_comp += 1

    # rank components by their lexicographically smallest core point
    core_idx = np.flatnonzero(core)
    order = core_idx[np.lexsort(X[core_idx].T[::-1])]
    rank = np.full(n_comp, -1, dtype=np.intp)
    nxt = 0
    for i in order:
        if rank[comp[i]] < 0:
            rank[comp[i]] = nxt
            nxt += 1
    labels = np.full(m, NOISE, dtype=np.intp)
    labels[core] = rank[comp[core]]
    for i in np.flatnonzero(~core):
        owners = [labels[q] for q in nbrs[i] if core[q]]
        if owners:
            labels[i] = min(owners)
    return labels


def canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Renumber clusters in order of first appearance, keeping noise."""
    labels = np.asarray(labels)
    out = np.full(labels.shape, NOISE, dtype=np.intp)
    mapping: dict[int, int] = {}
    for i, lab in enumerate(labels):
        if lab == NOISE:
            continue
        out[i] = mapping.setdefault(int(lab), len(mapping))
    return out


def canopy(X, thresholds: CanopyThresholds, rng=None, counter: DistanceCounter | None = None) -> CanopySet:
    """Canopies from randomly drawn centers.

    A canopy takes every point within ``t1`` of its center; points within
    ``t2`` leave the pool of future centers.
    """
    X = as_dataset(X)
    rng = as_rng(rng)
    t1sq, t2sq = thresholds.t1 ** 2, thresholds.t2 ** 2
    candidates = np.ones(X.shape[0], dtype=bool)
    out = CanopySet()
    while candidates.any():
        pool = np.flatnonzero(candidates)
        c = int(pool[rng.integers(pool.size)])
        d = pairwise_sq(X, X[c:c + 1], counter)[:, 0]
        out.centers.append(c)
        out.members.append(np.flatnonzero(d < t1sq))
        candidates &= ~(d <= t2sq)
        candidates[c] = False
    return out


def component_means(S: np.ndarray, labels: np.ndarray) -> np.ndarray:
    ids = np.unique(labels[labels != NOISE])
    if ids.size == 0:
        return np.empty((0, S.shape[1]))
    return np.vstack([S[labels == j].mean(axis=0) for j in ids])


def run_cludatase(X, k: int, s: int, params: DbscanParams, rng=None, max_rounds: int = 10,
                  counter: DistanceCounter | None = None, stop: StopRule = DEFAULT_STOP) -> ClusteringResult:
    """DBSCAN component means from fresh samples form a seed pool; K-means++
    picks ``k`` of them and Lloyd runs on the full dataset."""
    X = as_dataset(X)
    m = X.shape[0]
    if k > s:
        raise ValueError(f"k={k} exceeds sample size s={s}")
    if s > m:
        raise ValueError(f"sample size s={s} exceeds m={m}")
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    rng = as_rng(rng)
    counter = counter if counter is not None else DistanceCounter()
    start = counter.n_d
    t0 = time.perf_counter()

    pool = np.empty((0, X.shape[1]))
    rounds = 0
    while pool.shape[0] < k and rounds < max_rounds:
        S = X[rng.choice(m, size=s, replace=False)]
        pool = np.vstack([pool, component_means(S, dbscan(S, params, counter))])
        rounds += 1

    flags = []
    if pool.shape[0] < k:
        flags.append(f"pool held {pool.shape[0]} < k centroids after {rounds} rounds; topped up from X")
        if pool.shape[0]:
            closest = pairwise_sq(X, pool, counter).min(axis=1)
            extra, _ = kmeanspp_indices(X, k - pool.shape[0], rng, counter=counter, closest=closest)
        else:
            extra, _ = kmeanspp_indices(X, k, rng, counter=counter)
        pool = np.vstack([pool, X[extra]])
        C0 = pool
    else:
        idx, degenerate = kmeanspp_indices(pool, k, rng, counter=counter)
        if degenerate:
            flags.append("pool had fewer than k distinct centroids")
        C0 = pool[idx]
    res = run_lloyd(X, C0, stop, counter=counter)
    return ClusteringResult(
        centroids=res.centroids,
        labels=res.labels,
        objective=res.objective,
        elapsed_seconds=time.perf_counter() - t0,
        n_d=counter.n_d - start,
        n_s=rounds,
        iterations=res.iterations,
        flags=flags,
        extra={"rounds": rounds, "pool_size": int(pool.shape[0])},
    )
