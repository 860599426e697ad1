"""Command-line interface: ``mssc run|bench|lima-report|normalize``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .bench import ALGORITHMS, ConfigError, resolve_params, run_algorithm, run_bench, write_results
from .core import relative_error
from .io import DataFormatError, load_any, minmax_normalize, save_dataset

THREADS_ENV = "MSSC_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(kind: str, message: str, code: int) -> int:
    json.dump({"error": kind, "message": message}, sys.stderr)
    sys.stderr.write("\n")
    return code


def thread_budget(arg: int | None) -> int:
    if arg is not None:
        n = arg
    else:
        env = os.environ.get(THREADS_ENV)
        try:
            n = int(env) if env else 1
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if n < 1:
        raise UsageError("thread count must be >= 1")
    return n


def _algo_params(name: str, extra: list[str]) -> dict:
    """Turn leftover ``--key value`` / ``--key=value`` tokens into algorithm
    parameters (dashes become underscores)."""
    params = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise UsageError(f"unexpected argument {tok!r}")
        key, sep, value = tok[2:].partition("=")
        if not sep:
            if i + 1 >= len(extra):
                raise UsageError(f"missing value for {tok}")
            value = extra[i + 1]
            i += 1
        params[key.replace("-", "_")] = value
        i += 1
    try:
        resolve_params(name, params)
    except ConfigError as exc:
        if "unknown parameter" in str(exc):
            raise UsageError(str(exc)) from None
        if "is required" not in str(exc):
            raise
    return params


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mssc", allow_abbrev=False,
                description="Minimum sum-of-squares clustering algorithms and benchmark harness.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=int, default=None,
                   help=f"cap on total worker threads (default: ${THREADS_ENV} or 1)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", allow_abbrev=False, help="run one algorithm once and print the result as JSON",
                       epilog="Algorithm parameters are passed as --name value, e.g. --s 8000 --workers 4. "
                              "Algorithms: " + ", ".join(ALGORITHMS))
    r.add_argument("algorithm", choices=sorted(ALGORITHMS))
    r.add_argument("--data", required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--baseline", type=float, default=None, help="best-known objective f* for epsilon")
    r.add_argument("--skip-header", action="store_true")
    r.add_argument("--normalize", action="store_true", help="min-max scale columns before clustering")
    r.add_argument("--omit-timing", action="store_true", help="leave wall-clock fields out of the JSON")
    r.add_argument("--labels", action="store_true", help="include per-point labels")

    b = sub.add_parser("bench", allow_abbrev=False, help="run a benchmark configuration")
    b.add_argument("--config", required=True)
    b.add_argument("--omit-timing", action="store_true")

    lr = sub.add_parser("lima-report", allow_abbrev=False, help="LIMA dominance matrix from benchmark results")
    lr.add_argument("--results", required=True)
    lr.add_argument("--time-tolerance", type=float, default=0.0,
                    help="relative time gap treated as comparable (e.g. 0.06)")

    nz = sub.add_parser("normalize", allow_abbrev=False, help="min-max scale a dataset file")
    nz.add_argument("--data", required=True)
    nz.add_argument("--out", required=True)
    nz.add_argument("--skip-header", action="store_true")
    return p


def _cmd_run(args, extra, threads) -> int:
    params = _algo_params(args.algorithm, extra)
    X = load_any(args.data, args.skip_header)
    if args.normalize:
        X = minmax_normalize(X)
    res = run_algorithm(args.algorithm, X, args.k, params, args.seed, threads)
    out = {"algorithm": args.algorithm, "seed": args.seed}
    out.update(res.to_dict(include_timing=not args.omit_timing, include_labels=args.labels))
    if args.baseline is not None:
        out["epsilon"] = relative_error(res.objective, args.baseline)
    json.dump(out, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _cmd_bench(args, threads) -> int:
    from .config import load_config

    cfg = load_config(args.config, core_budget=threads)
    omit = args.omit_timing or cfg.omit_timing
    results = run_bench(cfg)
    write_results(results, cfg.output_json, cfg.output_markdown, include_timing=not omit)
    sys.stdout.write(results.to_markdown(include_timing=not omit))
    return 0


def _cmd_lima(args) -> int:
    from .lima import dominance_matrix, load_scores

    scores = load_scores(args.results)
    sys.stdout.write(dominance_matrix(scores, args.time_tolerance))
    return 0


def _cmd_normalize(args) -> int:
    save_dataset(minmax_normalize(load_any(args.data, args.skip_header)), args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        if extra and args.command != "run":
            raise UsageError(f"unrecognized arguments: {' '.join(extra)}")
        threads = thread_budget(args.threads)
        if args.command == "run":
            return _cmd_run(args, extra, threads)
        if args.command == "bench":
            return _cmd_bench(args, threads)
        if args.command == "lima-report":
            return _cmd_lima(args)
        return _cmd_normalize(args)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except (ConfigError, DataFormatError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    except (OSError, ValueError, LookupError, KeyError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
