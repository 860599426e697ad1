"""Minibatch K-means and Online K-means."""

from __future__ import annotations

import time
from collections.abc import Iterable, Iterator

import numpy as np

from .core import (
    ClusteringResult,
    DistanceCounter,
    as_dataset,
    as_rng,
    nearest,
    pairwise_sq,
)
from .seeding import forgy_seed


def run_minibatch(X, k: int, batch_size: int, max_iters: int = 100, rng=None,
                  counter: DistanceCounter | None = None) -> ClusteringResult:
    """Minibatch K-means with count-damped centroid updates.

    A centroid that has absorbed ``n_c`` points so far and receives ``b_c``
    batch members with sum ``s_c`` moves to ``(c * n_c + s_c) / (n_c + b_c)``.
    Runs exactly ``max_iters`` batches, then assigns all of ``X``.
    """
    X = as_dataset(X)
    m = X.shape[0]
    if not 1 <= batch_size <= m:
        raise ValueError(f"batch_size={batch_size} must satisfy 1 <= batch_size <= m={m}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    rng = as_rng(rng)
    counter = counter if counter is not None else DistanceCounter()
    start = counter.n_d
    t0 = time.perf_counter()

    C = forgy_seed(X, k, rng)
    counts = np.zeros(k, dtype=np.int64)
    for _ in range(max_iters):
        batch = X[rng.choice(m, size=batch_size, replace=False)]
        labels, _ = nearest(batch, C, counter)
        b = np.bincount(labels, minlength=k)
        sums = np.zeros_like(C)
        np.add.at(sums, labels, batch)
        touched = b > 0
        C[touched] = (C[touched] * counts[touched, None] + sums[touched]) / (counts[touched] + b[touched])[:, None]
        counts += b

    labels, mind = nearest(X, C, counter)
    return ClusteringResult(
        centroids=C,
        labels=labels,
        objective=float(mind.sum()),
        elapsed_seconds=time.perf_counter() - t0,
        n_d=counter.n_d - start,
        n_s=max_iters,
        iterations=max_iters,
        extra={"counts": counts.tolist()},
    )


class OnlineState:
    """Centroids plus the number of points each one has absorbed."""

    def __init__(self, seeds):
        self.centroids = np.array(seeds, dtype=np.float64, ndmin=2, copy=True)
        # one per seed point so the first update never divides by zero
        self.counts = np.ones(self.centroids.shape[0], dtype=np.int64)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def online_update(state: OnlineState, x, counter: DistanceCounter | None = None) -> OnlineState:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != state.centroids.shape[1]:
        raise ValueError(f"dimension mismatch: point has {x.shape[0]}, centroids have {state.centroids.shape[1]}")
    D = pairwise_sq(x[None, :], state.centroids, counter)[0]
    i = int(np.argmin(D))
    n_i = state.counts[i]
    state.centroids[i] = (state.centroids[i] * n_i + x) / (n_i + 1)
    state.counts[i] = n_i + 1
    return state


def run_online(points: Iterable, k: int, counter: DistanceCounter | None = None) -> OnlineState:
    """Consume a point stream; the first ``k`` points seed the centroids."""
    it: Iterator = iter(points)
    seeds = []
    for x in it:
        seeds.append(np.asarray(x, dtype=np.float64).ravel())
        if len(seeds) == k:
            break
    if len(seeds) < k:
        raise ValueError(f"stream ended after {len(seeds)} points, fewer than k={k}")
    state = OnlineState(np.vstack(seeds))
    for x in it:
        online_update(state, x, counter)
    return state


def online_kmeans(X, k: int, rng=None, counter: DistanceCounter | None = None,
                  shuffle: bool = True) -> ClusteringResult:
    """Online K-means over an in-memory dataset, followed by a final assignment.

    With ``shuffle`` the arrival order is a random permutation drawn from
    ``rng``; otherwise rows arrive in file order.
    """
    X = as_dataset(X)
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k={k} must satisfy 1 <= k <= m={X.shape[0]}")
    counter = counter if counter is not None else DistanceCounter()
    start = counter.n_d
    t0 = time.perf_counter()
    order = as_rng(rng).permutation(X.shape[0]) if shuffle else np.arange(X.shape[0])
    state = run_online((X[i] for i in order), k, counter)
    labels, mind = nearest(X, state.centroids, counter)
    return ClusteringResult(
        centroids=state.centroids,
        labels=labels,
        objective=float(mind.sum()),
        elapsed_seconds=time.perf_counter() - t0,
        n_d=counter.n_d - start,
        n_s=X.shape[0],
        iterations=1,
        extra={"counts": state.counts.tolist()},
    )
