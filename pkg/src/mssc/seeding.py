"""Centroid initialization: uniform box, Forgy, greedy K-means++, multi-start."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import (
    ClusteringResult,
    DistanceCounter,
    as_dataset,
    as_rng,
    child_seed,
    derive_rng,
    pairwise_sq,
)

METHODS = ("uniform-hull", "forgy", "kmeanspp")


@dataclass(frozen=True)
class SeedConfig:
    method: str = "kmeanspp"
    n_candidates: int = 3
    rng_seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown seeding method {self.method!r}; expected one of {METHODS}")
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")


def uniform_box_seed(X, k: int, rng) -> np.ndarray:
    """Per-coordinate uniform draws inside the bounding box of ``X``."""
    X = as_dataset(X)
    rng = as_rng(rng)
    lo, hi = X.min(axis=0), X.max(axis=0)
    return lo + rng.random((k, X.shape[1])) * (hi - lo)


def forgy_seed(X, k: int, rng) -> np.ndarray:
    X = as_dataset(X)
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k={k} must satisfy 1 <= k <= m={X.shape[0]}")
    idx = as_rng(rng).choice(X.shape[0], size=k, replace=False)
    return X[idx].copy()


def kmeanspp_indices(X: np.ndarray, n_new: int, rng: np.random.Generator,
                     n_candidates: int = 3, counter: DistanceCounter | None = None,
                     closest: np.ndarray | None = None):
    """Choose ``n_new`` row indices of ``X`` by greedy D^2 sampling.

    ``closest`` holds squared distances to already-fixed centers; when omitted
    the first index is drawn uniformly. Each step draws ``n_candidates`` points
    with probability proportional to ``d(x)^2`` (cumulative-sum inversion) and
    keeps the one giving the lowest total cost. When every remaining weight is
    zero the step falls back to a uniform pick among unused rows; the second
    return value reports whether that happened.
    """
    m = X.shape[0]
    chosen: list[int] = []
    degenerate = False
    if n_new <= 0:
        return np.array(chosen, dtype=np.intp), degenerate
    if closest is None:
        first = int(rng.integers(m))
        chosen.append(first)
        closest = pairwise_sq(X, X[first:first + 1], counter)[:, 0]
    else:
        closest = np.array(closest, dtype=np.float64, copy=True)
    while len(chosen) < n_new:
        pot = float(closest.sum())
        if not pot > 0:
            degenerate = True
            unused = np.setdiff1d(np.arange(m), np.asarray(chosen, dtype=np.intp))
            pool = unused if unused.size else np.arange(m)
            pick = int(pool[rng.integers(pool.size)])
            chosen.append(pick)
            closest = np.minimum(closest, pairwise_sq(X, X[pick:pick + 1], counter)[:, 0])
            continue
        cum = np.cumsum(closest)
        draws = rng.random(n_candidates) * cum[-1]
        # side="right" never lands on a zero-weight row except when a draw
        # rounds up to the total; send those to the last positive row
        cand = np.searchsorted(cum, draws, side="right")
        cand[cand >= m] = int(np.flatnonzero(closest > 0)[-1])
        D = pairwise_sq(X, X[cand], counter)
        np.minimum(D, closest[:, None], out=D)
        costs = D.sum(axis=0)
        best = int(np.argmin(costs))
        chosen.append(int(cand[best]))
        closest = D[:, best].copy()
    return np.array(chosen, dtype=np.intp), degenerate


def kmeans_pp_seed(X, k: int, rng, n_candidates: int = 3,
                   counter: DistanceCounter | None = None) -> np.ndarray:
    X = as_dataset(X)
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k={k} must satisfy 1 <= k <= m={X.shape[0]}")
    if n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    idx, _ = kmeanspp_indices(X, k, as_rng(rng), n_candidates, counter)
    return X[idx].copy()


def seed(X, k: int, cfg: SeedConfig | str, rng, counter: DistanceCounter | None = None):
    if isinstance(cfg, str):
        cfg = SeedConfig(method=cfg)
    if cfg.method == "forgy":
        return forgy_seed(X, k, rng)
    if cfg.method == "kmeanspp":
        return kmeans_pp_seed(X, k, rng, cfg.n_candidates, counter)
    return uniform_box_seed(X, k, rng)


def multi_start(X, k: int, restarts: int, rng, inner=None,
                counter: DistanceCounter | None = None) -> ClusteringResult:
    """Best of ``restarts`` Forgy-seeded local searches.

    Restart ``i`` draws its seed from the stream ``(base, i)`` so the outcome
    does not depend on execution order. ``inner(X, C0, counter)`` defaults to
    :func:`mssc.lloyd.run_lloyd`.
    """
    from .lloyd import run_lloyd

    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    X = as_dataset(X)
    inner = inner or (lambda data, C0, cnt: run_lloyd(data, C0, counter=cnt))
    counter = counter if counter is not None else DistanceCounter()
    base = child_seed(as_rng(rng))
    best: ClusteringResult | None = None
    total_iters = 0
    start = counter.n_d
    t0 = time.perf_counter()
    for i in range(restarts):
        C0 = forgy_seed(X, k, derive_rng(base, i))
        res = inner(X, C0, counter)
        total_iters += res.iterations
        if best is None or res.objective < best.objective:
            best = res
    best.n_d = counter.n_d - start
    best.iterations = total_iters
    best.elapsed_seconds = time.perf_counter() - t0
    best.extra = dict(best.extra, restarts=restarts)
    return best
