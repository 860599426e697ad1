"""Benchmark harness: repeated seeded runs, relative errors against best-known
objectives, min/median/max summaries and success counting."""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Any, Callable

import numpy as np

from .accel import run_ikmeans
from .bdcsm import run_bdcsm
from .bigmeans import MODES, BigMeansConfig, run_big_means
from .coreset import run_lw_coreset
from .core import ClusteringResult, DistanceCounter, relative_error
from .cure import CureParams, run_cure
from .density import DbscanParams, run_cludatase
from .lloyd import StopRule, run_lloyd
from .seeding import forgy_seed, kmeans_pp_seed, multi_start
from .stream import online_kmeans, run_minibatch

PROVENANCE = ("paper-published", "best-found-here")
EPS_TOL = 1e-9


class ConfigError(ValueError):
    """Bad benchmark or algorithm configuration."""


# --- algorithm registry -----------------------------------------------------

@dataclass(frozen=True)
class Param:
    kind: type
    default: Any = None     # None means required unless ``optional``
    optional: bool = False
    choices: tuple | None = None


@dataclass(frozen=True)
class Algorithm:
    name: str
    display: str
    params: dict[str, Param]
    runner: Callable[..., ClusteringResult]
    check: Callable[[dict, int, int], None] | None = None
    # worker threads a single run may occupy
    threads_per_run: Callable[[dict], int] = lambda p: 1


def _lloyd_stop(p):
    return StopRule(int(p["max_iters"]), float(p["tol"]))


def _run_kmeans(X, k, p, rng, counter, threads):
    return run_lloyd(X, forgy_seed(X, k, rng), _lloyd_stop(p), p["empty_policy"], counter)


def _run_kmeanspp(X, k, p, rng, counter, threads):
    t0 = time.perf_counter()
    start = counter.n_d
    C0 = kmeans_pp_seed(X, k, rng, int(p["n_candidates"]), counter)
    res = run_lloyd(X, C0, _lloyd_stop(p), p["empty_policy"], counter)
    res.n_d = counter.n_d - start
    res.elapsed_seconds = time.perf_counter() - t0
    return res


def _run_multistart(X, k, p, rng, counter, threads):
    stop = _lloyd_stop(p)
    return multi_start(X, k, int(p["restarts"]), rng,
                       inner=lambda data, C0, cnt: run_lloyd(data, C0, stop, counter=cnt), counter=counter)


def _run_ikmeans(X, k, p, rng, counter, threads):
    return run_ikmeans(X, k, rng, _lloyd_stop(p), int(p["recheck_period"]), counter, exclusion=p["exclusion"])


def _run_minibatch(X, k, p, rng, counter, threads):
    return run_minibatch(X, k, min(int(p["batch_size"]), X.shape[0]), int(p["max_iters"]), rng, counter)


def _run_online(X, k, p, rng, counter, threads):
    return online_kmeans(X, k, rng, counter, shuffle=bool(p["shuffle"]))


def _bigmeans_cfg(p, m, threads=None):
    return BigMeansConfig(
        s=min(int(p["s"]), m),
        max_samples=None if p["max_samples"] is None else int(p["max_samples"]),
        time_limit_seconds=None if p["time_limit"] is None else float(p["time_limit"]),
        workers=int(p["workers"]),
        mode=p["mode"],
        hybrid_switch_fraction=float(p["switch_fraction"]),
        threads=threads,
    )


def _run_bigmeans(X, k, p, rng, counter, threads):
    return run_big_means(X, k, _bigmeans_cfg(p, X.shape[0], threads), rng, counter)


def _run_bdcsm(X, k, p, rng, counter, threads):
    return run_bdcsm(X, k, int(p["p"]), rng, counter, threads=threads)


def _run_lwcoreset(X, k, p, rng, counter, threads):
    return run_lw_coreset(X, k, min(int(p["s"]), X.shape[0]), rng, counter)


def _cure_params(p, k, m):
    return CureParams(k=k, s=min(int(p["s"]), m), f=float(p["f"]), q=int(p["q"]), c=int(p["c"]),
                      alpha=float(p["alpha"]))


def _run_cure(X, k, p, rng, counter, threads):
    return run_cure(X, _cure_params(p, k, X.shape[0]), rng, counter, threads=threads)


def _run_cludatase(X, k, p, rng, counter, threads):
    return run_cludatase(X, k, min(int(p["s"]), X.shape[0]), DbscanParams(float(p["eps"]), int(p["min_pts"])),
                         rng, int(p["max_rounds"]), counter)


def _need(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _check_bigmeans(p, k, m):
    _need(k <= min(int(p["s"]), m), f"bigmeans: k={k} exceeds sample size s={min(int(p['s']), m)}")
    try:
        _bigmeans_cfg(p, m)
    except ValueError as exc:
        raise ConfigError(f"bigmeans: {exc}") from None


def _check_cure(p, k, m):
    try:
        cp = _cure_params(p, k, m)
    except ValueError as exc:
        raise ConfigError(f"cure: {exc}") from None
    _need(cp.s // cp.partitions >= cp.q * k,
          f"cure: partitions of {cp.s // cp.partitions} points need s/p >= q*k = {cp.q * k}")


_LLOYD = {
    "max_iters": Param(int, 300),
    "tol": Param(float, 1e-4),
    "empty_policy": Param(str, "keep-previous", choices=("keep-previous", "reseed-farthest-point")),
}

ALGORITHMS: dict[str, Algorithm] = {a.name: a for a in [
    Algorithm("kmeans", "K-means", dict(_LLOYD), _run_kmeans),
    Algorithm("kmeanspp", "K-means++", dict(_LLOYD, n_candidates=Param(int, 3)), _run_kmeanspp),
    Algorithm("multistart", "Multi-start K-means", dict(_LLOYD, restarts=Param(int, 10)), _run_multistart,
              lambda p, k, m: _need(int(p["restarts"]) >= 1, "multistart: restarts must be >= 1")),
    Algorithm("ikmeans", "IK-means",
              dict(_LLOYD, recheck_period=Param(int, 5),
                   exclusion=Param(str, "verbatim", choices=("verbatim", "strict-elkan", "off"))),
              _run_ikmeans),
    Algorithm("minibatch", "Minibatch K-means", {"batch_size": Param(int, 1024), "max_iters": Param(int, 100)},
              _run_minibatch,
              lambda p, k, m: _need(int(p["batch_size"]) >= 1 and int(p["max_iters"]) >= 1,
                                    "minibatch: batch_size and max_iters must be >= 1")),
    Algorithm("online", "Online K-means", {"shuffle": Param(bool, True)}, _run_online),
    Algorithm("bigmeans", "Big-means",
              {"s": Param(int, 4000), "max_samples": Param(int, 50, optional=True),
               "time_limit": Param(float, None, optional=True), "workers": Param(int, 1),
               "mode": Param(str, "hybrid", choices=MODES), "switch_fraction": Param(float, 0.5)},
              _run_bigmeans, _check_bigmeans, lambda p: int(p["workers"])),
    Algorithm("bdcsm", "BDCSM", {"p": Param(int, None)}, _run_bdcsm,
              lambda p, k, m: _need(int(p["p"]) >= k, f"bdcsm: chunk size p={p['p']} must be >= k={k}")),
    Algorithm("lwcoreset", "LW-Coreset", {"s": Param(int, 8000)}, _run_lwcoreset,
              lambda p, k, m: _need(k <= min(int(p["s"]), m), f"lwcoreset: k={k} exceeds coreset size s")),
    Algorithm("cure", "CURE",
              {"s": Param(int, 2000), "f": Param(float, 3.0), "q": Param(int, 3), "c": Param(int, 4),
               "alpha": Param(float, 0.3)},
              _run_cure, _check_cure),
    Algorithm("cludatase", "CluDataSE",
              {"s": Param(int, 8000), "eps": Param(float, None), "min_pts": Param(int, 16),
               "max_rounds": Param(int, 10)},
              _run_cludatase,
              lambda p, k, m: (_need(k <= min(int(p["s"]), m), "cludatase: k exceeds sample size s"),
                               _need(float(p["eps"]) > 0 and int(p["min_pts"]) >= 1,
                                     "cludatase: need eps > 0 and min_pts >= 1"))),
]}


def _coerce(kind: type, value):
    if kind is bool:
        if isinstance(value, str):
            low = value.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        return bool(value)
    if kind is int and isinstance(value, float) and not value.is_integer():
        raise ValueError(f"not an integer: {value!r}")
    if kind is int and isinstance(value, str):
        return int(float(value)) if float(value).is_integer() else int(value)
    return kind(value)


def resolve_params(name: str, given: dict | None, k: int | None = None, m: int | None = None) -> dict:
    """Fill defaults, coerce types and, when ``k`` and ``m`` are known, check
    the algorithm's preconditions. Raises :class:`ConfigError`."""
    if name not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {name!r}; known: {', '.join(ALGORITHMS)}")
    algo = ALGORITHMS[name]
    given = dict(given or {})
    unknown = sorted(set(given) - set(algo.params))
    if unknown:
        raise ConfigError(f"{name}: unknown parameter(s) {', '.join(unknown)}; "
                          f"accepted: {', '.join(algo.params) or 'none'}")
    out = {}
    for key, spec in algo.params.items():
        value = given.get(key, spec.default)
        if value is None or (isinstance(value, str) and value.lower() == "none" and spec.optional):
            if not spec.optional:
                if name == "bdcsm" and key == "p" and k is not None and m is not None:
                    value = max(k, m // 10)
                else:
                    raise ConfigError(f"{name}: parameter {key!r} is required")
            else:
                out[key] = None
                continue
        try:
            value = _coerce(spec.kind, value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: bad value for {key!r}: {exc}") from None
        if spec.choices is not None and value not in spec.choices:
            raise ConfigError(f"{name}: {key}={value!r} not in {spec.choices}")
        out[key] = value
    if k is not None and m is not None:
        if not 1 <= k <= m:
            raise ConfigError(f"{name}: k={k} must satisfy 1 <= k <= m={m}")
        if algo.check is not None:
            algo.check(out, k, m)
    return out


def run_algorithm(name: str, X: np.ndarray, k: int, params: dict | None = None, seed: int = 0,
                  threads: int = 1, counter: DistanceCounter | None = None) -> ClusteringResult:
    p = resolve_params(name, params, k, X.shape[0])
    counter = counter if counter is not None else DistanceCounter()
    rng = np.random.default_rng(seed)
    return ALGORITHMS[name].runner(X, k, p, rng, counter, max(1, threads))


# --- records and summaries --------------------------------------------------

@dataclass
class RunRecord:
    algorithm: str
    dataset: str
    k: int
    seed: int
    epsilon: float | None
    elapsed_seconds: float
    n_d: int
    n_s: int
    objective: float
    flags: list[str] = field(default_factory=list)

    def to_dict(self, include_timing: bool = True) -> dict:
        out = asdict(self)
        if not include_timing:
            out.pop("elapsed_seconds")
        return out


def lower_median(values) -> float:
    v = sorted(values)
    if not v:
        raise ValueError("median of an empty series")
    return v[(len(v) - 1) // 2]


@dataclass
class SeriesSummary:
    algorithm: str
    dataset: str
    k: int
    n_exec: int
    eps_min: float
    eps_med: float
    eps_max: float
    t_min: float
    t_med: float
    t_max: float
    f_min: float
    n_d_med: float

    @classmethod
    def from_records(cls, records: list[RunRecord]) -> "SeriesSummary":
        if not records:
            raise ValueError("cannot summarise an empty series")
        r0 = records[0]
        eps = [r.epsilon for r in records]
        if any(e is None for e in eps):
            raise ValueError("series contains runs without a relative error")
        ts = [r.elapsed_seconds for r in records]
        return cls(r0.algorithm, r0.dataset, r0.k, len(records),
                   min(eps), lower_median(eps), max(eps),
                   min(ts), lower_median(ts), max(ts),
                   min(r.objective for r in records),
                   lower_median([r.n_d for r in records]))

    def to_dict(self, include_timing: bool = True) -> dict:
        out = asdict(self)
        if not include_timing:
            for key in ("t_min", "t_med", "t_max"):
                out.pop(key)
        return out


@dataclass(frozen=True)
class Baseline:
    f_star: float
    provenance: str


class BaselineTable:
    """Best-known objectives keyed by ``(dataset, k)``; dataset names are
    matched case-insensitively."""

    def __init__(self, entries: dict[tuple[str, int], Baseline] | None = None):
        self.entries: dict[tuple[str, int], Baseline] = {}
        for key, b in (entries or {}).items():
            self.set(key[0], key[1], b.f_star, b.provenance)

    def set(self, dataset: str, k: int, f_star: float, provenance: str) -> None:
        if not f_star > 0:
            raise ConfigError(f"baseline for ({dataset}, {k}) must be positive, got {f_star}")
        if provenance not in PROVENANCE:
            raise ConfigError(f"unknown provenance {provenance!r}")
        self.entries[(dataset.lower(), int(k))] = Baseline(float(f_star), provenance)

    def get(self, dataset: str, k: int) -> Baseline | None:
        return self.entries.get((dataset.lower(), int(k)))

    def __contains__(self, key) -> bool:
        return (key[0].lower(), int(key[1])) in self.entries

    def copy(self) -> "BaselineTable":
        return BaselineTable(dict(self.entries))

    @classmethod
    def load(cls, path) -> "BaselineTable":
        table = cls()
        with open(path, encoding="utf-8", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].startswith("#") or row[0] == "dataset":
                    continue
                if len(row) != 4:
                    raise ConfigError(f"{path}, line {lineno}: expected dataset,k,f*,provenance")
                try:
                    table.set(row[0].strip(), int(row[1]), float(row[2]), row[3].strip())
                except ValueError as exc:
                    raise ConfigError(f"{path}, line {lineno}: {exc}") from None
        return table

    @classmethod
    def packaged(cls) -> "BaselineTable":
        with resources.as_file(resources.files("mssc") / "data" / "baselines.csv") as p:
            return cls.load(p)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["dataset", "k", "f_star", "provenance"])
            for (ds, k), b in sorted(self.entries.items()):
                w.writerow([ds, k, repr(b.f_star), b.provenance])

    def to_list(self) -> list[dict]:
        return [{"dataset": ds, "k": k, "f_star": b.f_star, "provenance": b.provenance}
                for (ds, k), b in sorted(self.entries.items())]


def run_seed(base_seed: int, run_index: int) -> int:
    """Seed of run ``run_index`` in a series: the first 63 bits of the stream
    ``(base_seed, run_index)``."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(run_index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def run_series(algorithm: str, X: np.ndarray, dataset: str, k: int, n_exec: int, base_seed: int,
               params: dict | None = None, baselines: BaselineTable | None = None,
               best_found: bool = False, core_budget: int = 1, warmup: bool = False):
    """``n_exec`` seeded runs of one algorithm on one ``(dataset, k)``.

    Returns ``(summary, records)``. Without a baseline entry the call fails
    unless ``best_found`` is set, in which case the series minimum becomes
    the reference. Runs share a pool of ``core_budget`` threads; records come
    back in run order whatever the completion order.
    """
    if n_exec < 1:
        raise ConfigError("n_exec must be >= 1")
    baselines = baselines if baselines is not None else BaselineTable()
    base = baselines.get(dataset, k)
    if base is None and not best_found:
        raise ConfigError(f"no baseline f* for ({dataset}, k={k}); enable best-found mode")
    p = resolve_params(algorithm, params, k, X.shape[0])
    per_run = max(1, min(ALGORITHMS[algorithm].threads_per_run(p), core_budget))
    slots = max(1, core_budget // per_run)

    if warmup:
        run_algorithm(algorithm, X, k, p, run_seed(base_seed, n_exec), per_run)

    def one(i):
        seed = run_seed(base_seed, i)
        res = run_algorithm(algorithm, X, k, p, seed, per_run)
        return RunRecord(algorithm, dataset, k, seed, None, res.elapsed_seconds, res.n_d, res.n_s,
                         res.objective, list(res.flags))

    if slots > 1 and n_exec > 1:
        with ThreadPoolExecutor(max_workers=slots) as pool:
            records = list(pool.map(one, range(n_exec)))
    else:
        records = [one(i) for i in range(n_exec)]

    if base is None:
        f_star = min(r.objective for r in records)
        if not f_star > 0:
            raise ConfigError(f"best objective for ({dataset}, k={k}) is 0; relative error undefined")
        baselines.set(dataset, k, f_star, "best-found-here")
        base = baselines.get(dataset, k)
    for r in records:
        r.epsilon = relative_error(r.objective, base.f_star)
    return SeriesSummary.from_records(records), records


def update_best_found(records: list[RunRecord], table: BaselineTable) -> BaselineTable:
    """Lower each ``f*`` to the best objective seen in ``records`` and
    recompute every record's ``epsilon`` in place against the new table."""
    new = table.copy()
    best: dict[tuple[str, int], float] = {}
    for r in records:
        key = (r.dataset, r.k)
        best[key] = min(best.get(key, np.inf), r.objective)
    for (ds, k), f in best.items():
        cur = new.get(ds, k)
        if (cur is None or f < cur.f_star) and f > 0:
            new.set(ds, k, f, "best-found-here")
    for r in records:
        b = new.get(r.dataset, r.k)
        if b is not None:
            r.epsilon = relative_error(r.objective, b.f_star)
    return new


def success_counts(summaries: list[SeriesSummary], tol: float = EPS_TOL) -> dict[str, int]:
    """``#Succ`` per algorithm over one dataset's ``k`` grid."""
    if not summaries:
        return {}
    datasets = {s.dataset for s in summaries}
    if len(datasets) != 1:
        raise ValueError(f"success counts need a single dataset, got {sorted(datasets)}")
    grid: dict[str, dict[int, float]] = {}
    for s in summaries:
        grid.setdefault(s.algorithm, {})[s.k] = s.eps_med
    ks = {frozenset(v) for v in grid.values()}
    if len(ks) != 1:
        raise ValueError("algorithms were not summarised on the same k grid")
    counts = {a: 0 for a in grid}
    for k in sorted(next(iter(ks))):
        best = min(grid[a][k] for a in grid)
        for a in grid:
            if abs(grid[a][k] - best) <= tol:
                counts[a] += 1
    return counts


def dataset_means(summaries: list[SeriesSummary]) -> list[dict]:
    """Mean of the median relative error and median time over ``k``, per
    ``(algorithm, dataset)``."""
    groups: dict[tuple[str, str], list[SeriesSummary]] = {}
    for s in summaries:
        groups.setdefault((s.algorithm, s.dataset), []).append(s)
    return [{"algorithm": a, "dataset": d,
             "eps_med_mean": float(np.mean([s.eps_med for s in g])),
             "t_med_mean": float(np.mean([s.t_med for s in g]))}
            for (a, d), g in sorted(groups.items())]


# --- full harness -----------------------------------------------------------

@dataclass
class BenchResults:
    records: list[RunRecord]
    summaries: list[SeriesSummary]
    baselines: BaselineTable

    def to_dict(self, include_timing: bool = True) -> dict:
        by_ds: dict[str, list[SeriesSummary]] = {}
        for s in self.summaries:
            by_ds.setdefault(s.dataset, []).append(s)
        out = {
            "records": [r.to_dict(include_timing) for r in self.records],
            "summaries": [s.to_dict(include_timing) for s in self.summaries],
            "success_counts": {ds: success_counts(ss) for ds, ss in by_ds.items()},
            "baselines": self.baselines.to_list(),
        }
        means = dataset_means(self.summaries)
        if not include_timing:
            for row in means:
                row.pop("t_med_mean")
        out["dataset_means"] = means
        return out

    def to_markdown(self, include_timing: bool = True) -> str:
        lines = []
        by_ds: dict[str, list[SeriesSummary]] = {}
        for s in self.summaries:
            by_ds.setdefault(s.dataset, []).append(s)
        for ds, ss in by_ds.items():
            succ = success_counts(ss)
            lines.append(f"## {ds}")
            lines.append("")
            head = "| Algorithm | k | f* | eps Min | eps Median | eps Max |"
            sep = "|---|---|---|---|---|---|"
            if include_timing:
                head += " t Min | t Median | t Max |"
                sep += "---|---|---|"
            lines += [head, sep]
            for s in sorted(ss, key=lambda s: (s.algorithm, s.k)):
                b = self.baselines.get(ds, s.k)
                row = (f"| {ALGORITHMS[s.algorithm].display if s.algorithm in ALGORITHMS else s.algorithm} "
                       f"| {s.k} | {b.f_star:.6g} | {s.eps_min:.2f} | {s.eps_med:.2f} | {s.eps_max:.2f} |")
                if include_timing:
                    row += f" {s.t_min:.2f} | {s.t_med:.2f} | {s.t_max:.2f} |"
                lines.append(row)
            lines.append("")
            head = "| Algorithm | #Succ | mean eps Median |"
            sep = "|---|---|---|"
            if include_timing:
                head += " mean t Median |"
                sep += "---|"
            lines += [head, sep]
            for row in dataset_means(ss):
                name = ALGORITHMS[row["algorithm"]].display if row["algorithm"] in ALGORITHMS else row["algorithm"]
                line = f"| {name} | {succ[row['algorithm']]}/{len({s.k for s in ss})} | {row['eps_med_mean']:.2f} |"
                if include_timing:
                    line += f" {row['t_med_mean']:.2f} |"
                lines.append(line)
            lines.append("")
        return "\n".join(lines)


def run_bench(config, datasets: dict[str, np.ndarray] | None = None) -> BenchResults:
    """Execute every (dataset, algorithm, k) series of a validated
    :class:`mssc.config.BenchConfig`."""
    from .config import load_datasets

    datasets = datasets if datasets is not None else load_datasets(config)
    table = BaselineTable.load(config.baselines) if config.baselines else BaselineTable.packaged()
    records: list[RunRecord] = []
    summaries: list[SeriesSummary] = []
    for ds in config.datasets:
        X = datasets[ds.name]
        for algo in config.algorithms:
            for k in config.k_values:
                s, recs = run_series(algo.name, X, ds.name, k, config.n_exec, config.base_seed, algo.params,
                                     table, config.best_found, config.core_budget, config.warmup)
                summaries.append(s)
                records.extend(recs)
    if config.best_found:
        table = update_best_found(records, table)
        groups: dict[tuple, list[RunRecord]] = {}
        for r in records:
            groups.setdefault((r.algorithm, r.dataset, r.k), []).append(r)
        summaries = [SeriesSummary.from_records(groups[(s.algorithm, s.dataset, s.k)]) for s in summaries]
    return BenchResults(records, summaries, table)


def write_results(results: BenchResults, json_path=None, markdown_path=None, include_timing: bool = True):
    if json_path:
        os.makedirs(os.path.dirname(os.path.abspath(json_path)), exist_ok=True)
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(results.to_dict(include_timing), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if markdown_path:
        os.makedirs(os.path.dirname(os.path.abspath(markdown_path)), exist_ok=True)
        with open(markdown_path, "w", encoding="utf-8") as fh:
            fh.write(results.to_markdown(include_timing))
