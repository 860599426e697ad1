"""Benchmark configuration files (TOML or JSON), validated before any run."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .bench import ConfigError, resolve_params
from .io import DataFormatError, load_any, minmax_normalize

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    path: str
    skip_header: bool = False
    normalize: bool = False


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class BenchConfig:
    datasets: list[DatasetSpec]
    algorithms: list[AlgorithmSpec]
    k_values: list[int]
    n_exec: int = 15
    base_seed: int = 0
    output_json: str | None = None
    output_markdown: str | None = None
    core_budget: int = 1
    baselines: str | None = None
    best_found: bool = True
    warmup: bool = False
    omit_timing: bool = False
    data: dict = field(default_factory=dict, repr=False, compare=False)


_TOP_KEYS = {"datasets", "algorithms", "k", "n_exec", "seed", "output", "core_budget", "baselines",
             "best_found", "warmup", "omit_timing"}


def _read_tree(path: str) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        if path.lower().endswith(".json"):
            return json.loads(raw.decode("utf-8"))
        return tomllib.loads(raw.decode("utf-8"))
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: cannot parse configuration: {exc}") from None


def load_config(path, core_budget: int | None = None) -> BenchConfig:
    """Parse and fully validate a benchmark configuration.

    Layout (TOML shown; JSON uses the same tree)::

        k = [2, 3, 5]
        n_exec = 15
        seed = 1
        [[datasets]]
        name = "d15112"
        path = "d15112.tsp"
        [[algorithms]]
        name = "bigmeans"
        params = { s = 8000, workers = 4 }
        [output]
        json = "out/results.json"
        markdown = "out/results.md"

    Relative paths resolve against the configuration file's directory.
    Every dataset is loaded and every algorithm/k pair checked against the
    algorithm's preconditions here, so a bad entry fails before any run.
    """
    path = os.fspath(path)
    tree = _read_tree(path)
    if not isinstance(tree, dict):
        raise ConfigError(f"{path}: top level must be a table")
    unknown = sorted(set(tree) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")
    root = os.path.dirname(os.path.abspath(path))

    def rel(p):
        return p if p is None or os.path.isabs(p) else os.path.join(root, p)

    datasets = []
    for i, d in enumerate(tree.get("datasets") or []):
        if not isinstance(d, dict) or "path" not in d:
            raise ConfigError(f"{path}: datasets[{i}] needs a path")
        p = rel(str(d["path"]))
        if not os.path.isfile(p):
            raise ConfigError(f"{path}: dataset file not found: {p}")
        name = str(d.get("name") or os.path.splitext(os.path.basename(p))[0])
        datasets.append(DatasetSpec(name, p, bool(d.get("skip_header", False)), bool(d.get("normalize", False))))
    if not datasets:
        raise ConfigError(f"{path}: no datasets configured")
    if len({d.name for d in datasets}) != len(datasets):
        raise ConfigError(f"{path}: dataset names must be unique")

    algorithms = []
    for i, a in enumerate(tree.get("algorithms") or []):
        if isinstance(a, str):
            a = {"name": a}
        if not isinstance(a, dict) or "name" not in a:
            raise ConfigError(f"{path}: algorithms[{i}] needs a name")
        algorithms.append(AlgorithmSpec(str(a["name"]), dict(a.get("params") or {})))
    if not algorithms:
        raise ConfigError(f"{path}: no algorithms configured")

    ks = tree.get("k")
    ks = [ks] if isinstance(ks, int) else ks
    if not ks or not all(isinstance(k, int) and k >= 1 for k in ks):
        raise ConfigError(f"{path}: k must be a positive integer or a list of them")
    n_exec = tree.get("n_exec", 15)
    if not isinstance(n_exec, int) or n_exec < 1:
        raise ConfigError(f"{path}: n_exec must be a positive integer")
    out = tree.get("output") or {}
    budget = core_budget if core_budget is not None else int(tree.get("core_budget", 1))
    if budget < 1:
        raise ConfigError(f"{path}: core_budget must be >= 1")
    baselines = rel(tree.get("baselines"))
    if baselines is not None and not os.path.isfile(baselines):
        raise ConfigError(f"{path}: baselines file not found: {baselines}")

    cfg = BenchConfig(datasets, algorithms, list(ks), n_exec, int(tree.get("seed", 0)),
                      rel(out.get("json")), rel(out.get("markdown")), budget, baselines,
                      bool(tree.get("best_found", True)), bool(tree.get("warmup", False)),
                      bool(tree.get("omit_timing", False)))
    data = cfg.data = load_datasets(cfg)
    for d in cfg.datasets:
        m = data[d.name].shape[0]
        for a in cfg.algorithms:
            for k in cfg.k_values:
                resolve_params(a.name, a.params, k, m)
    return cfg


def load_datasets(cfg: BenchConfig) -> dict[str, np.ndarray]:
    if cfg.data:
        return cfg.data
    out = {}
    for d in cfg.datasets:
        try:
            X = load_any(d.path, d.skip_header)
        except (OSError, DataFormatError) as exc:
            raise ConfigError(str(exc)) from None
        out[d.name] = minmax_normalize(X) if d.normalize else X
    return out
