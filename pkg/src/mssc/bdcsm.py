"""BDCSM: cluster disjoint chunks independently, then cluster the pooled
chunk centroids and assign the full dataset."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    ClusteringResult,
    DistanceCounter,
    as_dataset,
    as_rng,
    child_seed,
    derive_rng,
    nearest,
)
from .lloyd import DEFAULT_STOP, StopRule, run_lloyd
from .seeding import forgy_seed, kmeans_pp_seed


@dataclass(frozen=True)
class ChunkPlan:
    chunk_size: int
    bounds: tuple[tuple[int, int], ...]

    @classmethod
    def build(cls, m: int, p: int) -> "ChunkPlan":
        if p < 1:
            raise ValueError("chunk size must be >= 1")
        return cls(p, tuple((lo, min(lo + p, m)) for lo in range(0, m, p)))

    def __len__(self) -> int:
        return len(self.bounds)


def cluster_chunk(chunk: np.ndarray, k: int, rng: np.random.Generator, stop: StopRule,
                  counter: DistanceCounter):
    """Forgy-seeded Lloyd on one chunk. Returns the centroids that own points
    and, separately, those left with an empty cluster."""
    kk = min(k, chunk.shape[0])
    res = run_lloyd(chunk, forgy_seed(chunk, kk, rng), stop, counter=counter)
    used = np.bincount(res.labels, minlength=kk) > 0
    return res.centroids[used], res.centroids[~used]


def run_bdcsm(X, k: int, p: int, rng=None, counter: DistanceCounter | None = None,
              stop: StopRule = DEFAULT_STOP, threads: int = 1) -> ClusteringResult:
    X = as_dataset(X)
    m = X.shape[0]
    if p < k:
        raise ValueError(f"chunk size p={p} must be >= k={k}")
    if not 1 <= k <= m:
        raise ValueError(f"k={k} must satisfy 1 <= k <= m={m}")
    counter = counter if counter is not None else DistanceCounter()
    start = counter.n_d
    t0 = time.perf_counter()
    rng = as_rng(rng)
    base = child_seed(rng)
    Xs = X[rng.permutation(m)]
    plan = ChunkPlan.build(m, p)

    def work(i):
        lo, hi = plan.bounds[i]
        return cluster_chunk(Xs[lo:hi], k, derive_rng(base, i), stop, counter)

    if threads > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(work, range(len(plan))))
    else:
        outs = [work(i) for i in range(len(plan))]
    pool_pts = np.vstack([c for c, _ in outs])
    dropped = sum(d.shape[0] for _, d in outs)
    flags = [f"dropped {dropped} empty chunk cluster(s)"] if dropped else []
    if pool_pts.shape[0] < k:
        pool_pts = np.vstack([pool_pts] + [d for _, d in outs])
        flags = [f"pool smaller than k; kept {dropped} empty chunk cluster(s)"]

    C0 = kmeans_pp_seed(pool_pts, k, derive_rng(base, len(plan)), counter=counter)
    res = run_lloyd(pool_pts, C0, stop, counter=counter)
    labels, mind = nearest(X, res.centroids, counter)
    return ClusteringResult(
        centroids=res.centroids,
        labels=labels,
        objective=float(mind.sum()),
        elapsed_seconds=time.perf_counter() - t0,
        n_d=counter.n_d - start,
        iterations=res.iterations,
        flags=flags,
        extra={"chunks": len(plan), "pool_size": int(pool_pts.shape[0]), "dropped": dropped},
    )
