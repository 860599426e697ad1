"""CURE: sample, partition, agglomerate each partition, summarise clusters by
shrunken representative points, agglomerate the pool down to k and assign."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    ClusteringResult,
    DistanceCounter,
    as_dataset,
    as_rng,
    nearest,
    pairwise_sq,
    update_centroids,
)


@dataclass(frozen=True)
class CureParams:
    k: int
    s: int
    f: float = 3.0
    q: int = 3
    c: int = 4
    alpha: float = 0.3

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.s < self.k:
            raise ValueError(f"sample size s={self.s} must be >= k={self.k}")
        if not self.f > 0:
            raise ValueError("partition factor f must be positive")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.c < 1:
            raise ValueError("c must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")

    @property
    def partitions(self) -> int:
        return max(1, math.floor(self.s / (self.f * self.k * self.q)))


@dataclass
class RepCluster:
    centroid: np.ndarray
    reps: np.ndarray
    members: np.ndarray   # rows of the sample

    @property
    def size(self) -> int:
        return int(self.members.shape[0])


def agglomerate(D: np.ndarray, target: int, merge: Callable[[int, int, np.ndarray], np.ndarray]):
    """Greedy pairwise merging down to ``target`` clusters.

    ``D`` holds initial inter-cluster distances. ``merge(a, b, alive)`` folds
    cluster ``b`` into ``a`` and returns the distances from the new ``a`` to
    every cluster (entries for dead clusters are ignored). Returns the
    surviving indices and the distance of every merge performed.
    """
    n = D.shape[0]
    D = np.array(D, dtype=np.float64, copy=True)
    np.fill_diagonal(D, np.inf)
    alive = np.ones(n, dtype=bool)
    rmin = D.min(axis=1) if n else np.zeros(0)
    rarg = D.argmin(axis=1) if n else np.zeros(0, dtype=np.intp)
    heights = []
    count = n
    while count > target:
        i = int(np.argmin(rmin))
        j = int(rarg[i])
        a, b = min(i, j), max(i, j)
        heights.append(float(rmin[i]))
        alive[b] = False
        row = np.asarray(merge(a, b, alive), dtype=np.float64).copy()
        row[~alive] = np.inf
        row[a] = np.inf
        D[a, :] = row
        D[:, a] = row
        D[b, :] = np.inf
        D[:, b] = np.inf
        rmin[b] = np.inf
        count -= 1
        stale = np.flatnonzero(alive & ((rarg == a) | (rarg == b)))
        if stale.size:
            rarg[stale] = D[stale].argmin(axis=1)
            rmin[stale] = D[stale, rarg[stale]]
        better = alive & (row < rmin)
        rmin[better] = row[better]
        rarg[better] = a
        rarg[a] = int(np.argmin(row))
        rmin[a] = row[rarg[a]]
    return np.flatnonzero(alive), heights


def centroid_linkage(P: np.ndarray, target: int, counter: DistanceCounter | None = None):
    """Centroid-linkage agglomeration of the rows of ``P``; returns one label
    per row (0..target-1, ordered by first member)."""
    m = P.shape[0]
    cent = P.copy()
    size = np.ones(m)
    owner = np.arange(m)

    def merge(a, b, alive):
        cent[a] = (size[a] * cent[a] + size[b] * cent[b]) / (size[a] + size[b])
        size[a] += size[b]
        owner[owner == b] = a
        row = np.full(m, np.inf)
        idx = np.flatnonzero(alive)
        row[idx] = pairwise_sq(cent[idx], cent[a:a + 1], counter)[:, 0]
        return row

    D = pairwise_sq(P, P, counter)
    agglomerate(D, target, merge)
    _, labels = np.unique(owner, return_inverse=True)
    return labels


def scattered_reps(members: np.ndarray, centroid: np.ndarray, c: int, alpha: float,
                   counter: DistanceCounter | None = None) -> np.ndarray:
    """Farthest-first choice of up to ``c`` members, each moved a fraction
    ``alpha`` of the way toward ``centroid``."""
    c = min(c, members.shape[0])
    closest = pairwise_sq(members, centroid[None, :], counter)[:, 0]
    picked = []
    for _ in range(c):
        i = int(np.argmax(closest))
        picked.append(i)
        d = pairwise_sq(members, members[i:i + 1], counter)[:, 0]
        closest = d if len(picked) == 1 else np.minimum(closest, d)
        closest[picked] = -1.0
    reps = members[picked]
    return reps + alpha * (centroid - reps)


def cluster_partition(P: np.ndarray, params: CureParams, counter: DistanceCounter | None = None):
    target = params.q * params.k
    if P.shape[0] < target:
        raise ValueError(
            f"partition of {P.shape[0]} points cannot hold q*k={target} clusters; "
            f"need s/p >= q*k")
    labels = centroid_linkage(P, target, counter)
    out = []
    for j in range(target):
        members = P[labels == j]
        centroid = members.mean(axis=0)
        out.append(RepCluster(centroid, scattered_reps(members, centroid, params.c, params.alpha, counter), members))
    return out


def merge_pool(clusters: list[RepCluster], k: int, params: CureParams,
               counter: DistanceCounter | None = None):
    """Agglomerate clusters down to ``k`` using the minimum distance between
    representative sets."""
    clusters = list(clusters)
    n = len(clusters)

    def rep_dist(a: int, idx: np.ndarray) -> np.ndarray:
        owners = np.concatenate([np.full(clusters[i].reps.shape[0], i) for i in idx])
        allreps = np.vstack([clusters[i].reps for i in idx])
        d = pairwise_sq(allreps, clusters[a].reps, counter).min(axis=1)
        row = np.full(n, np.inf)
        np.minimum.at(row, owners, d)
        return row

    D = np.full((n, n), np.inf)
    everyone = np.arange(n)
    for a in range(n):
        D[a] = rep_dist(a, everyone)

    def merge(a, b, alive):
        A, B = clusters[a], clusters[b]
        members = np.vstack([A.members, B.members])
        centroid = (A.size * A.centroid + B.size * B.centroid) / (A.size + B.size)
        clusters[a] = RepCluster(centroid, scattered_reps(members, centroid, params.c, params.alpha, counter), members)
        return rep_dist(a, np.flatnonzero(alive))

    survivors, heights = agglomerate(D, k, merge)
    return [clusters[i] for i in survivors], heights


def run_cure(X, params: CureParams, rng=None, counter: DistanceCounter | None = None,
             threads: int = 1) -> ClusteringResult:
    """CURE on a uniform sample of ``params.s`` points.

    Every point of ``X`` goes to the cluster owning its nearest
    representative; the reported centroids are the means of those groups and
    the objective is the MSSC value of those centroids.
    """
    X = as_dataset(X)
    m = X.shape[0]
    if params.s > m:
        raise ValueError(f"sample size s={params.s} exceeds m={m}")
    counter = counter if counter is not None else DistanceCounter()
    start = counter.n_d
    t0 = time.perf_counter()
    S = X[as_rng(rng).choice(m, size=params.s, replace=False)]
    parts = np.array_split(S, params.partitions)
    if threads > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            groups = list(pool.map(lambda P: cluster_partition(P, params, counter), parts))
    else:
        groups = [cluster_partition(P, params, counter) for P in parts]
    pooled = [c for g in groups for c in g]
    final, heights = merge_pool(pooled, params.k, params, counter)

    reps = np.vstack([c.reps for c in final])
    owner = np.concatenate([np.full(c.reps.shape[0], j) for j, c in enumerate(final)])
    rep_idx, _ = nearest(X, reps, counter)
    groups_of_x = owner[rep_idx]
    C, empty = update_centroids(X, groups_of_x, len(final), previous=np.vstack([c.centroid for c in final]))
    labels, mind = nearest(X, C, counter)
    flags = [f"{int(empty.sum())} cluster(s) received no points"] if empty.any() else []
    return ClusteringResult(
        centroids=C,
        labels=labels,
        objective=float(mind.sum()),
        elapsed_seconds=time.perf_counter() - t0,
        n_d=counter.n_d - start,
        n_s=1,
        iterations=len(heights),
        flags=flags,
        extra={"partitions": len(parts), "pool_clusters": len(pooled),
               "representative_labels_changed": int((labels != groups_of_x).sum())},
    )
