"""Minimum sum-of-squares clustering: K-means variants for large datasets,
an instrumented benchmark harness and LIMA dominance scoring."""

__version__ = "0.1.0"

from .core import (
    ClusteringResult,
    DistanceCounter,
    assign_points,
    objective,
    relative_error,
    update_centroids,
)
from .lloyd import StopRule, run_lloyd
from .seeding import SeedConfig, forgy_seed, kmeans_pp_seed, multi_start, uniform_box_seed
from .accel import run_ikmeans
from .stream import online_kmeans, run_minibatch
from .bigmeans import BigMeansConfig, run_big_means
from .bdcsm import run_bdcsm
from .coreset import build_lightweight_coreset, run_lw_coreset
from .cure import CureParams, run_cure
from .density import CanopyThresholds, DbscanParams, canopy, dbscan, run_cludatase

__all__ = [
    "BigMeansConfig",
    "CanopyThresholds",
    "ClusteringResult",
    "CureParams",
    "DbscanParams",
    "DistanceCounter",
    "SeedConfig",
    "StopRule",
    "assign_points",
    "build_lightweight_coreset",
    "canopy",
    "dbscan",
    "forgy_seed",
    "kmeans_pp_seed",
    "multi_start",
    "objective",
    "online_kmeans",
    "relative_error",
    "run_bdcsm",
    "run_big_means",
    "run_cludatase",
    "run_cure",
    "run_ikmeans",
    "run_lloyd",
    "run_lw_coreset",
    "run_minibatch",
    "uniform_box_seed",
    "update_centroids",
]
