"""Command line entry point.

Usage: ``parafield <experiment> --config <path> [--seed S] [--out DIR]``.

Exit codes: 0 on success, 1 when an in-run assertion fails, 2 on a
config or usage error.  The PARAFIELD_THREADS environment variable caps
the BLAS/FFT thread pools before numpy gets imported by the pipelines.
"""

from __future__ import annotations

import argparse
import os
import sys


def _apply_thread_env():
    n = os.environ.get("PARAFIELD_THREADS")
    if not n:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, n)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="parafield",
        description="run a spectral-lab experiment from a config file")
    p.add_argument("experiment", help="experiment name (must match the "
                                      "[experiment] name in the config)")
    p.add_argument("--config", required=True, help="path to the config file")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.add_argument("--out", default=None, help="override the output directory")
    return p


def main(argv=None) -> int:
    _apply_thread_env()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0

    from .experiments import ConfigError, parse_config, run_experiment

    try:
        cfg = parse_config(args.config, seed=args.seed, out=args.out)
        if cfg.experiment != args.experiment:
            raise ConfigError(
                f"config is for {cfg.experiment!r}, not {args.experiment!r}")
    except ConfigError as e:
        print(f"parafield: config error: {e}", file=sys.stderr)
        return 2

    record = run_experiment(cfg)
    for a in record["assertions"]:
        status = "PASS" if a["passed"] else "FAIL"
        print(f"[{status}] {a['name']}")
    for m in record["metrics"]:
        se = f" +/- {m['stderr']:.3g}" if "stderr" in m else ""
        print(f"  {m['name']} = {m['value']:.6g}{se}")
    print(f"wrote {cfg.out}/summary.json ({record['wall_time']:.1f}s)")
    return 0 if record["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
