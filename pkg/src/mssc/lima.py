"""LIMA numbers (ingredient counts) and the LIMA dominance relation."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass


@dataclass(frozen=True)
class LimaProfile:
    name: str
    ingredients: tuple[str, ...]
    input_parameters: tuple[str, ...]

    @property
    def lima_number(self) -> int:
        return len(self.ingredients)

    @property
    def input_parameter_count(self) -> int:
        return len(self.input_parameters)


PROFILES: dict[str, LimaProfile] = {p.name: p for p in [
    LimaProfile("BDCSM", ("partitioning", "clustering", "centroid pooling", "final clustering",
                          "final assignment"), ("p",)),
    LimaProfile("Big-means", ("random sampling", "conditional reinitialization", "centroid update",
                              "condition checking and updating", "iteration", "final assignment"), ("s", "T")),
    LimaProfile("Minibatch K-means", ("initialization", "random sampling", "assignment", "centroid update",
                                      "iteration", "final assignment"), ("T", "m")),
    LimaProfile("K-means++", ("random selection", "distance calculation", "probabilistic selection",
                              "iteration", "cluster assignment", "centroid update"), ("T",)),
    LimaProfile("CURE", ("random sampling", "partitioning", "hierarchical clustering",
                         "representative selection", "geometric transformation", "iteration",
                         "cluster assignment"), ("s", "f", "k", "q", "c", "alpha")),
    LimaProfile("CluDataSE", ("random sampling", "density-based clustering", "cluster center reduction",
                              "k-means clustering", "iteration", "parameter adjustment",
                              "cluster assignment"), ("s", "eps", "min_pts")),
    LimaProfile("LW-Coreset", ("mean calculation", "distance computation", "probability computation",
                               "sampling", "centroid initialization", "centroid update", "assignment"), ("s",)),
    LimaProfile("IK-means", ("initialization", "distance computation", "exclusion check", "assignment",
                             "centroid reinitialization", "centroid update", "radius update",
                             "convergence check"), ()),
]}

# registry names used by the harness and CLI
ALIASES = {
    "bdcsm": "BDCSM",
    "bigmeans": "Big-means",
    "minibatch": "Minibatch K-means",
    "kmeanspp": "K-means++",
    "cure": "CURE",
    "cludatase": "CluDataSE",
    "lwcoreset": "LW-Coreset",
    "ikmeans": "IK-means",
}


def _key(name: str) -> str:
    return re.sub(r"[^a-z0-9+]", "", name.lower())


_LOOKUP = {_key(n): n for n in PROFILES}
_LOOKUP.update({_key(a): n for a, n in ALIASES.items()})


def profile(name: str) -> LimaProfile:
    try:
        return PROFILES[_LOOKUP[_key(name)]]
    except KeyError:
        raise LookupError(f"no LIMA profile for algorithm {name!r}") from None


def lima_number(name: str) -> int:
    return profile(name).lima_number


@dataclass(frozen=True)
class AlgoScore:
    name: str
    accuracy: float
    time: float
    lima_number: int

    def __post_init__(self):
        if self.time < 0:
            raise ValueError("time must be non-negative")

    def __str__(self) -> str:
        return f"{self.name}({self.accuracy:g}, {self.time:g}, {self.lima_number})"


def _times(b: float, a: float, tol: float):
    """(b <= a, b < a) with times inside a relative band treated as equal."""
    if tol > 0 and abs(b - a) <= tol * max(abs(a), abs(b)):
        return True, False
    return b <= a, b < a


def dominates(B: AlgoScore, A: AlgoScore, time_tolerance: float = 0.0) -> bool:
    """Whether ``B`` LIMA-dominates ``A``.

    ``B`` must be no worse in accuracy (lower is better), time and LIMA
    number, and strictly better in at least one. With ``time_tolerance``
    times within that relative gap count as comparable, i.e. equal.
    """
    if time_tolerance < 0:
        raise ValueError("time_tolerance must be non-negative")
    t_le, t_lt = _times(B.time, A.time, time_tolerance)
    le = B.accuracy <= A.accuracy and t_le and B.lima_number <= A.lima_number
    lt = B.accuracy < A.accuracy or t_lt or B.lima_number < A.lima_number
    return le and lt


def scores_from_results(data: dict) -> list[AlgoScore]:
    """Build scores from harness JSON or from a plain ``scores`` list.

    Harness output is reduced as mean of median relative error over ``k`` per
    dataset, then averaged over datasets (time likewise).
    """
    if "scores" in data:
        return [AlgoScore(s["algorithm"], float(s["accuracy"]), float(s["time"]),
                          int(s.get("lima_number", lima_number(s["algorithm"]))))
                for s in data["scores"]]
    per_algo: dict[str, list[dict]] = {}
    for row in data.get("dataset_means", []):
        per_algo.setdefault(row["algorithm"], []).append(row)
    out = []
    for algo, rows in per_algo.items():
        if any("t_med_mean" not in r for r in rows):
            raise ValueError("results were written without timing; dominance needs times")
        acc = sum(r["eps_med_mean"] for r in rows) / len(rows)
        t = sum(r["t_med_mean"] for r in rows) / len(rows)
        try:
            n = lima_number(algo)
        except LookupError:
            continue
        out.append(AlgoScore(profile(algo).name, acc, t, n))
    return out


def load_scores(path) -> list[AlgoScore]:
    with open(path, encoding="utf-8") as fh:
        return scores_from_results(json.load(fh))


def dominance_matrix(scores: list[AlgoScore], time_tolerance: float = 0.0) -> str:
    """Markdown matrix; the cell in row B, column A reads ``>`` when B
    dominates A."""
    names = [s.name for s in scores]
    lines = ["| B \\ A | " + " | ".join(names) + " |", "|---" * (len(names) + 1) + "|"]
    for b in scores:
        cells = []
        for a in scores:
            cells.append("-" if a is b else (">" if dominates(b, a, time_tolerance) else ""))
        lines.append(f"| {b.name} | " + " | ".join(cells) + " |")
    lines.append("")
    lines.append("Scores: " + ", ".join(str(s) for s in scores))
    for b in scores:
        for a in scores:
            if a is not b and dominates(b, a, time_tolerance):
                lines.append(f"- {b} dominates {a}")
    return "\n".join(lines) + "\n"
