"""Shared kernel: squared distances with evaluation counting, assignment,
centroid update and the minimum sum-of-squares objective."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any

import numpy as np

# Rows per block when materialising point-to-centroid distance matrices.
_BLOCK_BYTES = 32 * 1024 * 1024


class DistanceCounter:
    """Thread-safe tally of squared-distance evaluations (``n_d``)."""

    def __init__(self, start: int = 0):
        self._n = int(start)
        self._lock = threading.Lock()

    @property
    def n_d(self) -> int:
        return self._n

    def add(self, amount: int) -> None:
        amount = int(amount)
        if amount < 0:
            raise ValueError("distance counter can only increase")
        with self._lock:
            self._n += amount

    def __repr__(self) -> str:
        return f"DistanceCounter(n_d={self._n})"


def as_dataset(X: Any) -> np.ndarray:
    """Validate ``X`` as an m x n matrix of finite float64 values."""
    arr = np.ascontiguousarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"dataset must be 2-D, got shape {arr.shape}")
    m, n = arr.shape
    if m < 1 or n < 1:
        raise ValueError(f"dataset must have m >= 1 and n >= 1, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("dataset contains NaN or infinite values")
    return arr


def as_centroids(C: Any, n: int) -> np.ndarray:
    arr = np.array(C, dtype=np.float64, ndmin=2)
    if arr.ndim != 2 or arr.shape[1] != n:
        raise ValueError(f"centroids must have shape (k, {n}), got {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("at least one centroid is required")
    if not np.isfinite(arr).all():
        raise ValueError("centroids contain NaN or infinite values")
    return arr


def squared_distance(a, b, counter: DistanceCounter | None = None) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    diff = a - b
    if counter is not None:
        counter.add(1)
    return float(diff @ diff)


def pairwise_sq(X: np.ndarray, C: np.ndarray, counter: DistanceCounter | None = None) -> np.ndarray:
    """Full ``len(X) x len(C)`` matrix of squared distances.

    Computed from explicit differences (not the dot-product expansion) so that
    duplicated points give exact zeros.
    """
    m, k = X.shape[0], C.shape[0]
    out = np.empty((m, k), dtype=np.float64)
    rows = max(1, _BLOCK_BYTES // (8 * max(1, k * X.shape[1])))
    for lo in range(0, m, rows):
        diff = X[lo:lo + rows, None, :] - C[None, :, :]
        np.einsum("ijk,ijk->ij", diff, diff, out=out[lo:lo + rows])
    if counter is not None:
        counter.add(m * k)
    return out


def nearest(X: np.ndarray, C: np.ndarray, counter: DistanceCounter | None = None):
    """Labels and squared distance to the nearest centroid; ties go to the
    lowest centroid index."""
    m, k = X.shape[0], C.shape[0]
    labels = np.empty(m, dtype=np.intp)
    mind = np.empty(m, dtype=np.float64)
    rows = max(1, _BLOCK_BYTES // (8 * max(1, k * X.shape[1])))
    for lo in range(0, m, rows):
        D = pairwise_sq(X[lo:lo + rows], C)
        idx = np.argmin(D, axis=1)
        labels[lo:lo + rows] = idx
        mind[lo:lo + rows] = D[np.arange(D.shape[0]), idx]
    if counter is not None:
        counter.add(m * k)
    return labels, mind


def assign_points(X, C, counter: DistanceCounter | None = None):
    """Map every point to its nearest centroid.

    Returns ``(labels, objective)`` where the objective is the MSSC value
    ``sum_i min_j ||x_i - c_j||^2``. The counter advances by exactly ``m*k``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot assign an empty dataset")
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[1] != X.shape[1]:
        raise ValueError(f"centroid dimension {C.shape} does not match dataset {X.shape}")
    labels, mind = nearest(X, C, counter)
    return labels, float(mind.sum())


def objective(X, C, counter: DistanceCounter | None = None) -> float:
    return assign_points(X, C, counter)[1]


def update_centroids(X, labels, k: int, previous=None):
    """Cluster means for ``labels``.

    Clusters that received no points keep their row from ``previous`` (zeros
    if not given) and are reported in the returned boolean flag array.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    n = X.shape[1]
    counts = np.bincount(labels, minlength=k)[:k]
    sums = np.zeros((k, n), dtype=np.float64)
    np.add.at(sums, labels, X)
    empty = counts == 0
    if previous is None:
        C = np.zeros((k, n), dtype=np.float64)
    else:
        C = np.array(previous, dtype=np.float64, copy=True)
    filled = ~empty
    C[filled] = sums[filled] / counts[filled, None]
    return C, empty


def relative_error(f: float, f_star: float) -> float:
    """Percentage gap ``100 * (f - f*) / f*``; negative when ``f`` beats ``f*``."""
    if not f_star > 0:
        raise ValueError(f"reference objective must be positive, got {f_star}")
    return 100.0 * (f - f_star) / f_star


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the stream identified by ``(seed, *keys)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in keys))
    return np.random.default_rng(ss)


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def child_seed(rng: np.random.Generator) -> int:
    """Draw a base seed so sub-streams can be derived as ``(seed, index)``."""
    return int(rng.integers(0, 2**63 - 1))


@dataclass
class ClusteringResult:
    centroids: np.ndarray
    labels: np.ndarray
    objective: float
    elapsed_seconds: float = 0.0
    n_d: int = 0
    n_s: int = 0
    iterations: int = 0
    flags: list[str] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    def to_dict(self, include_timing: bool = True, include_labels: bool = False) -> dict:
        out: dict[str, Any] = {
            "f": float(self.objective),
            "k": self.k,
            "n_d": int(self.n_d),
            "n_s": int(self.n_s),
            "iterations": int(self.iterations),
            "centroids": self.centroids.tolist(),
            "flags": list(self.flags),
        }
        if include_timing:
            out["t"] = float(self.elapsed_seconds)
        if include_labels:
            out["labels"] = self.labels.tolist()
        for key, value in self.extra.items():
            if include_timing or not key.endswith("seconds"):
                out[key] = value
        return out
