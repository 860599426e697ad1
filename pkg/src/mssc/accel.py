"""IK-means: K-means with early classification of stable points.

Points whose two nearest centroids are separated by more than the combined
centroid shifts are excluded from later assignment passes. Every
``recheck_period`` iterations an excluded point is compared against its
cluster radius and re-included when it falls outside.
"""

from __future__ import annotations

import time

import numpy as np

from .core import (
    ClusteringResult,
    DistanceCounter,
    as_centroids,
    as_dataset,
    as_rng,
    pairwise_sq,
    update_centroids,
)
from .lloyd import DEFAULT_STOP, StopRule
from .seeding import forgy_seed

EXCLUSION_MODES = ("verbatim", "strict-elkan", "off")


def exclusion_test(d1: np.ndarray, d2: np.ndarray, s1: np.ndarray, s2: np.ndarray,
                   mode: str = "verbatim") -> np.ndarray:
    """Which points may be frozen, given squared distances to the two nearest
    centroids (``d1 <= d2``) and those centroids' last shifts.

    ``verbatim`` compares the gap of squared distances with the shift sum;
    ``strict-elkan`` compares the gap of plain distances instead.
    """
    if mode == "off":
        return np.zeros(d1.shape, dtype=bool)
    if mode == "verbatim":
        return np.abs(d1 - d2) > s1 + s2
    if mode == "strict-elkan":
        return np.sqrt(d2) - np.sqrt(d1) > s1 + s2
    raise ValueError(f"unknown exclusion mode {mode!r}")


def run_ikmeans(X, k: int, rng=None, stop: StopRule = DEFAULT_STOP, recheck_period: int = 5,
                counter: DistanceCounter | None = None, C0=None, exclusion: str = "verbatim",
                trace: list | None = None) -> ClusteringResult:
    X = as_dataset(X)
    m, n = X.shape
    if C0 is None:
        if not 1 <= k <= m:
            raise ValueError(f"k={k} must satisfy 1 <= k <= m={m}")
        C = forgy_seed(X, k, as_rng(rng))
    else:
        C = as_centroids(C0, n).copy()
        k = C.shape[0]
    if recheck_period < 1:
        raise ValueError("recheck_period must be >= 1")
    if exclusion not in EXCLUSION_MODES:
        raise ValueError(f"unknown exclusion mode {exclusion!r}")
    counter = counter if counter is not None else DistanceCounter()
    start = counter.n_d
    t0 = time.perf_counter()

    A = np.zeros(m, dtype=np.intp)
    R = np.zeros(k)
    S = np.zeros(k)
    E = np.zeros(m, dtype=bool)
    known = np.zeros(m)       # last exact squared distance to own centroid
    upper = np.zeros(m)       # upper bound on distance to own centroid

    prev_labels = None
    f_prev = None
    reason = "max_iters"
    excluded_peak = 0
    it = 0
    while True:
        it += 1
        rechecked = np.zeros(m, dtype=bool)
        own = np.zeros(m)
        if it % recheck_period == 0 and E.any():
            idx = np.flatnonzero(E)
            diff = X[idx] - C[A[idx]]
            own[idx] = np.einsum("ij,ij->i", diff, diff)
            counter.add(idx.size)
            rechecked[idx] = True
            known[idx] = own[idx]
            upper[idx] = np.sqrt(own[idx])
            E[idx[upper[idx] > R[A[idx]]]] = False

        active = np.flatnonzero(~E)
        D = pairwise_sq(X[active], C)
        reused = rechecked[active]
        counter.add(active.size * k - int(reused.sum()))
        if reused.any():
            D[np.flatnonzero(reused), A[active[reused]]] = own[active[reused]]
        idx1 = np.argmin(D, axis=1)
        d1 = D[np.arange(active.size), idx1]
        A[active] = idx1
        known[active] = d1
        upper[active] = np.sqrt(d1)
        if it >= 2 and k >= 2 and exclusion != "off":
            D[np.arange(active.size), idx1] = np.inf
            idx2 = np.argmin(D, axis=1)
            d2 = D[np.arange(active.size), idx2]
            E[active[exclusion_test(d1, d2, S[idx1], S[idx2], exclusion)]] = True
        excluded_peak = max(excluded_peak, int(E.sum()))

        f = float(known.sum())
        if trace is not None:
            trace.append(f)
        if E.all():
            reason = "all-excluded"
            break
        if prev_labels is not None and np.array_equal(A, prev_labels):
            reason = "converged"
            break
        if it >= stop.max_iters:
            reason = "max_iters"
            break
        if f_prev is not None and (f_prev == 0.0 or (f_prev - f) / f_prev < stop.rel_tol):
            reason = "tolerance"
            break

        C_new, _ = update_centroids(X, A, k, previous=C)
        shift = C_new - C
        S = np.sqrt((shift * shift).sum(axis=1))
        if np.array_equal(C_new, C):
            reason = "converged"
            break
        upper += S[A]
        R = np.zeros(k)
        np.maximum.at(R, A, upper)
        C = C_new
        prev_labels = A.copy()
        f_prev = f

    # Exact objective for the returned centroids: points frozen during this
    # pass still need their full distance rows.
    stale = np.ones(m, dtype=bool)
    stale[active] = False
    labels = A.copy()
    mind = known.copy()
    if stale.any():
        sidx = np.flatnonzero(stale)
        Ds = pairwise_sq(X[sidx], C)
        counter.add(sidx.size * k - int(rechecked[sidx].sum()))
        if rechecked[sidx].any():
            r = rechecked[sidx]
            Ds[np.flatnonzero(r), A[sidx[r]]] = own[sidx[r]]
        labels[sidx] = np.argmin(Ds, axis=1)
        mind[sidx] = Ds[np.arange(sidx.size), labels[sidx]]

    return ClusteringResult(
        centroids=C,
        labels=labels,
        objective=float(mind.sum()),
        elapsed_seconds=time.perf_counter() - t0,
        n_d=counter.n_d - start,
        iterations=it,
        extra={"stop_reason": reason, "excluded_peak": excluded_peak,
               "exclusion": exclusion, "recheck_period": recheck_period},
    )
