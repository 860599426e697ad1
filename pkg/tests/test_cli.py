import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from mssc import cli
from mssc.io import load_dataset, save_dataset
from oracles import blobs

PAPER_SCORES = Path(__file__).resolve().parents[1] / "src" / "mssc" / "data" / "paper_scores.json"


@pytest.fixture
def toy(tmp_path):
    X = blobs(np.random.default_rng(0), [(0, 0), (10, 10)], 25)
    p = tmp_path / "toy.csv"
    save_dataset(X, p)
    return p


def _run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_run_prints_result_json(capsys, toy):
    code, out, _ = _run(capsys, "run", "kmeanspp", "--data", toy, "--k", 2, "--seed", 3, "--baseline", 100.0)
    assert code == 0
    d = json.loads(out)
    for key in ("f", "epsilon", "t", "n_d", "centroids"):
        assert key in d
    assert d["epsilon"] == pytest.approx(100 * (d["f"] - 100.0) / 100.0)


def test_run_algorithm_params(capsys, toy):
    code, out, _ = _run(capsys, "run", "bigmeans", "--data", toy, "--k", 2, "--s", 20, "--workers=2",
                        "--omit-timing")
    assert code == 0
    d = json.loads(out)
    assert "t" not in d and "wall_seconds" not in d and d["workers"] == 2


@pytest.mark.parametrize("argv", [
    ["run", "kmeans", "--k", "2"],
    ["run", "nope", "--data", "x", "--k", "2"],
    ["run", "kmeans", "--data", "x", "--k", "2", "--bogus", "1"],
    ["frobnicate"],
    ["normalize", "--data", "x", "--out", "y", "--extra"],
])
def test_usage_errors_exit_2_with_json(capsys, argv):
    code, out, err = _run(capsys, *argv)
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "usage"


def test_data_error_exit_1(capsys, tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3\n")
    code, _, err = _run(capsys, "run", "kmeans", "--data", p, "--k", "1")
    assert code == 1
    d = json.loads(err)
    assert d["error"] == "DataFormatError" and "line 2" in d["message"]


def test_k_too_large_is_reported(capsys, toy):
    code, _, err = _run(capsys, "run", "kmeans", "--data", toy, "--k", 999)
    assert code == 1 and json.loads(err)["message"]


def test_threads_env_override(capsys, toy, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli.thread_budget(None) == 3
    assert cli.thread_budget(2) == 2
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    code, _, err = _run(capsys, "run", "kmeans", "--data", toy, "--k", 2)
    assert code == 2


def test_bench_writes_outputs(capsys, toy, tmp_path):
    cfg = tmp_path / "bench.toml"
    cfg.write_text(
        'k = [2, 3]\nn_exec = 3\nseed = 7\n'
        f'[[datasets]]\nname = "toy"\npath = "{toy.name}"\n'
        '[[algorithms]]\nname = "kmeans"\n'
        '[[algorithms]]\nname = "bigmeans"\nparams = { s = 20 }\n'
        '[output]\njson = "out/r.json"\nmarkdown = "out/r.md"\n')
    code, out, _ = _run(capsys, "bench", "--config", cfg)
    assert code == 0
    md = (tmp_path / "out" / "r.md").read_text()
    assert "## toy" in md
    assert md.count("| K-means | 2 |") == 1 and md.count("| Big-means | 3 |") == 1
    data = json.loads((tmp_path / "out" / "r.json").read_text())
    assert len(data["records"]) == 2 * 2 * 3
    assert out == md


def test_bench_rejects_bad_config_before_running(capsys, toy, tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(f'k = [2]\n[[datasets]]\npath = "{toy.name}"\n[[algorithms]]\nname = "cludatase"\n')
    code, _, err = _run(capsys, "bench", "--config", cfg)
    assert code == 1 and "eps" in json.loads(err)["message"]


def test_lima_report(capsys):
    code, out, _ = _run(capsys, "lima-report", "--results", PAPER_SCORES, "--time-tolerance", "0.06")
    assert code == 0
    assert "Big-means(0.6, 4.13, 6) dominates K-means++(4.15, 72.51, 6)" in out
    assert "Big-means(0.6, 4.13, 6) dominates LW-Coreset(39.39, 3.92, 7)" in out


def test_normalize(capsys, tmp_path):
    src = tmp_path / "a.csv"
    src.write_text("0,10\n2,20\n4,30\n")
    dst = tmp_path / "b.csv"
    code, _, _ = _run(capsys, "normalize", "--data", src, "--out", dst)
    assert code == 0
    assert load_dataset(dst).tolist() == [[0, 0], [0.5, 0.5], [1, 1]]


def test_module_entry_point(toy):
    p = subprocess.run([sys.executable, "-m", "mssc.cli", "run", "kmeans", "--data", str(toy), "--k", "2",
                        "--omit-timing"], capture_output=True, text=True, check=True)
    assert json.loads(p.stdout)["k"] == 2
