"""Big-means: K-means over a stream of uniform samples with a keep-the-best
incumbent, K-means++ reseeding of degenerate centroids, and competitive,
collective or hybrid parallel workers."""

from __future__ import annotations

import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    ClusteringResult,
    DistanceCounter,
    as_dataset,
    as_rng,
    child_seed,
    derive_rng,
    nearest,
    pairwise_sq,
)
from .lloyd import StopRule, run_lloyd
from .seeding import kmeanspp_indices

MODES = ("competitive", "collective", "hybrid")


@dataclass(frozen=True)
class BigMeansConfig:
    s: int
    max_samples: int | None = 100
    time_limit_seconds: float | None = None
    workers: int = 1
    mode: str = "hybrid"
    hybrid_switch_fraction: float = 0.5
    n_candidates: int = 3
    stop: StopRule = field(default_factory=StopRule)
    threads: int | None = None

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("sample size s must be >= 1")
        if self.max_samples is None and self.time_limit_seconds is None:
            raise ValueError("at least one of max_samples / time_limit_seconds must be bounded")
        if self.max_samples is not None and self.max_samples < 1:
            raise ValueError("max_samples must be >= 1")
        if self.time_limit_seconds is not None and not self.time_limit_seconds > 0:
            raise ValueError("time_limit_seconds must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not 0.0 <= self.hybrid_switch_fraction <= 1.0:
            raise ValueError("hybrid_switch_fraction must lie in [0, 1]")


@dataclass
class Incumbent:
    centroids: np.ndarray | None = None
    best_f: float = math.inf
    updated_at_seconds: float = 0.0
    updates: int = 0

    def offer(self, C: np.ndarray, f: float, now: float) -> bool:
        if f < self.best_f:
            self.centroids = C
            self.best_f = f
            self.updated_at_seconds = now
            self.updates += 1
            return True
        return False

    def copy(self) -> "Incumbent":
        C = None if self.centroids is None else self.centroids.copy()
        return Incumbent(C, self.best_f, self.updated_at_seconds, self.updates)


class SharedIncumbent:
    """Incumbent shared by collective workers.

    ``publish`` is an atomic compare-and-swap: a candidate replaces the stored
    pair only when its objective is strictly lower.
    """

    def __init__(self, start: Incumbent | None = None):
        self._inc = start.copy() if start is not None else Incumbent()
        self._lock = threading.Lock()

    def snapshot(self) -> Incumbent:
        with self._lock:
            return self._inc.copy()

    def publish(self, C: np.ndarray, f: float, now: float) -> bool:
        with self._lock:
            return self._inc.offer(C, f, now)


def reseed_degenerate(S: np.ndarray, C: np.ndarray, rng: np.random.Generator, n_candidates: int,
                      counter: DistanceCounter | None):
    """Replace centroids owning no sample point by K-means++ picks from ``S``.

    Repeats while a reseed steals every point of another centroid. Returns the
    new centroids and whether an empty cluster had to be left in place.
    """
    C = C.copy()
    k = C.shape[0]
    D = pairwise_sq(S, C, counter)
    for _ in range(k):
        counts = np.bincount(np.argmin(D, axis=1), minlength=k)
        empty = counts == 0
        if not empty.any():
            return C, False
        closest = D[:, ~empty].min(axis=1)
        idx, degenerate = kmeanspp_indices(S, int(empty.sum()), rng, n_candidates, counter, closest=closest)
        C[empty] = S[idx]
        D[:, empty] = pairwise_sq(S, C[empty], counter)
        if degenerate:
            break
    counts = np.bincount(np.argmin(D, axis=1), minlength=k)
    return C, bool((counts == 0).any())


def sample_step(X: np.ndarray, C_inc: np.ndarray | None, k: int, cfg: BigMeansConfig,
                rng: np.random.Generator, counter: DistanceCounter):
    """Draw one sample and run a local search on it from the incumbent."""
    S = X[rng.choice(X.shape[0], size=cfg.s, replace=False)]
    flagged = False
    if C_inc is None:
        idx, flagged = kmeanspp_indices(S, k, rng, cfg.n_candidates, counter)
        C = S[idx].copy()
    else:
        C, flagged = reseed_degenerate(S, C_inc, rng, cfg.n_candidates, counter)
    res = run_lloyd(S, C, cfg.stop, "keep-previous", counter)
    return res.centroids, res.objective, flagged


def run_big_means(X, k: int, cfg: BigMeansConfig, rng=None, counter: DistanceCounter | None = None,
                  on_accept: Callable[[int, float], None] | None = None) -> ClusteringResult:
    """Big-means over ``cfg.workers`` round-synchronous workers.

    ``cfg.max_samples`` is a per-worker budget. In each round every worker
    processes one sample; results are merged in worker order, so a fixed
    seed, worker count and mode always reproduce the same run when the budget
    is a sample count. ``on_accept(worker, f)`` fires on every incumbent
    update (worker ``-1`` for the shared incumbent).
    """
    X = as_dataset(X)
    m = X.shape[0]
    if not 1 <= cfg.s <= m:
        raise ValueError(f"s={cfg.s} must satisfy 1 <= s <= m={m}")
    if k > cfg.s:
        raise ValueError(f"k={k} exceeds sample size s={cfg.s}")
    if k < 1:
        raise ValueError("k must be >= 1")
    counter = counter if counter is not None else DistanceCounter()
    start_nd = counter.n_d
    base = child_seed(as_rng(rng))
    W = cfg.workers
    rngs = [derive_rng(base, w) for w in range(W)]
    counters = [DistanceCounter() for _ in range(W)]
    private = [Incumbent() for _ in range(W)]
    shared: SharedIncumbent | None = None
    if cfg.mode == "collective":
        shared = SharedIncumbent()

    if cfg.mode == "hybrid":
        if cfg.max_samples is not None:
            switch_round = math.floor(cfg.hybrid_switch_fraction * cfg.max_samples)
            switch_time = None
        else:
            switch_round = None
            switch_time = cfg.hybrid_switch_fraction * cfg.time_limit_seconds
    else:
        switch_round = switch_time = None

    flags: list[str] = []
    n_samples = 0
    n_threads = max(1, min(W, cfg.threads or W))
    pool = ThreadPoolExecutor(max_workers=n_threads) if n_threads > 1 else None
    t0 = time.perf_counter()
    try:
        r = 0
        while True:
            elapsed = time.perf_counter() - t0
            if cfg.max_samples is not None and r >= cfg.max_samples:
                break
            if cfg.time_limit_seconds is not None and elapsed >= cfg.time_limit_seconds:
                break
            if shared is None and cfg.mode == "hybrid" and (
                    (switch_round is not None and r >= switch_round)
                    or (switch_time is not None and elapsed >= switch_time)):
                best_w = min(range(W), key=lambda w: (private[w].best_f, w))
                shared = SharedIncumbent(private[best_w])
            collective = shared is not None

            if collective:
                snap = shared.snapshot()
                starts = [snap.centroids] * W
            else:
                starts = [p.centroids for p in private]

            def work(w, start=starts):
                return sample_step(X, start[w], k, cfg, rngs[w], counters[w])

            if pool is not None:
                outs = list(pool.map(work, range(W)))
            else:
                outs = [work(w) for w in range(W)]
            now = time.perf_counter() - t0
            n_samples += W
            for w, (C_new, f_new, flagged) in enumerate(outs):
                if flagged and "degenerate sample" not in flags:
                    flags.append("degenerate sample")
                if collective:
                    if shared.publish(C_new, f_new, now) and on_accept is not None:
                        on_accept(-1, f_new)
                elif private[w].offer(C_new, f_new, now) and on_accept is not None:
                    on_accept(w, f_new)
            r += 1
    finally:
        if pool is not None:
            pool.shutdown()

    if shared is not None:
        best = shared.snapshot()
    else:
        best = min(private, key=lambda p: p.best_f)
    for c in counters:
        counter.add(c.n_d)
    labels, mind = nearest(X, best.centroids, counter)
    return ClusteringResult(
        centroids=best.centroids,
        labels=labels,
        objective=float(mind.sum()),
        elapsed_seconds=best.updated_at_seconds,
        n_d=counter.n_d - start_nd,
        n_s=n_samples,
        iterations=r,
        flags=flags,
        extra={"sample_objective": best.best_f, "mode": cfg.mode, "workers": W,
               "wall_seconds": time.perf_counter() - t0},
    )
