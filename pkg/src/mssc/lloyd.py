"""Standard K-means local search (assignment / update alternation)."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import (
    ClusteringResult,
    DistanceCounter,
    as_centroids,
    as_dataset,
    nearest,
    update_centroids,
)

EMPTY_POLICIES = ("keep-previous", "reseed-farthest-point")


@dataclass(frozen=True)
class StopRule:
    max_iters: int = 300
    rel_tol: float = 1e-4

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be non-negative")


DEFAULT_STOP = StopRule()


def reseed_farthest(X, C, empty, mind):
    """Move each empty centroid onto the currently worst-served point.

    Reuses the distances from the last assignment, so no extra evaluations.
    """
    C = C.copy()
    mind = mind.copy()
    for j in np.flatnonzero(empty):
        i = int(np.argmax(mind))
        C[j] = X[i]
        mind[i] = -1.0
    return C


def run_lloyd(X, C0, stop: StopRule = DEFAULT_STOP, empty_policy: str = "keep-previous",
              counter: DistanceCounter | None = None, trace: list | None = None) -> ClusteringResult:
    """Lloyd iterations from ``C0``.

    Each iteration is one full assignment pass (``m*k`` distance evaluations)
    followed, unless a stop condition fires, by a centroid update. Stops when
    the assignment or the centroids stop changing, after ``stop.max_iters``
    passes, or when the relative objective decrease falls below
    ``stop.rel_tol``. The returned objective always belongs to the returned
    centroids. Per-iteration objectives are appended to ``trace`` if given.
    """
    if empty_policy not in EMPTY_POLICIES:
        raise ValueError(f"unknown empty_policy {empty_policy!r}")
    X = as_dataset(X)
    C = as_centroids(C0, X.shape[1]).copy()
    k = C.shape[0]
    counter = counter if counter is not None else DistanceCounter()
    start = counter.n_d
    t0 = time.perf_counter()

    prev_labels = None
    f_prev = None
    reason = "max_iters"
    reseeds = 0
    it = 0
    while True:
        labels, mind = nearest(X, C, counter)
        f = float(mind.sum())
        it += 1
        if trace is not None:
            trace.append(f)
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            reason = "converged"
            break
        if it >= stop.max_iters:
            reason = "max_iters"
            break
        if f_prev is not None and (f_prev == 0.0 or (f_prev - f) / f_prev < stop.rel_tol):
            reason = "tolerance"
            break
        C_new, empty = update_centroids(X, labels, k, previous=C)
        if empty.any() and empty_policy == "reseed-farthest-point":
            C_new = reseed_farthest(X, C_new, empty, mind)
            reseeds += int(empty.sum())
        if np.array_equal(C_new, C):
            reason = "converged"
            break
        C = C_new
        prev_labels = labels
        f_prev = f

    res = ClusteringResult(
        centroids=C,
        labels=labels,
        objective=f,
        elapsed_seconds=time.perf_counter() - t0,
        n_d=counter.n_d - start,
        iterations=it,
        extra={"stop_reason": reason},
    )
    if reseeds:
        res.flags.append(f"reseeded {reseeds} empty cluster(s)")
    return res
