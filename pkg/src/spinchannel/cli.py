"""Command-line entry point.

    spinchannel [--threads N] [--lambda X] [--gamma X] run CONFIG
    spinchannel figure fig3 --out results/
    spinchannel verify --quick

Exit status: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericError
from .experiments import (
    FIGURES,
    OUTPUT_DIR_ENV,
    apply_overrides,
    default_output_dir,
    figure,
    load_config,
    run_experiment,
    verify,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _globals() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                   help="worker threads for sweeps (default 1)")
    p.add_argument("--lambda", dest="lam", type=float, default=argparse.SUPPRESS,
                   help="override the coupling scale")
    p.add_argument("--gamma", type=float, default=argparse.SUPPRESS,
                   help="override the decoherence rate")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _globals()
    parser = argparse.ArgumentParser(
        prog="spinchannel", parents=[common],
        description="State transfer and entanglement in XX spin networks under Lindblad noise.",
        epilog=f"Relative output paths resolve against ${OUTPUT_DIR_ENV} (default: cwd).")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run every experiment in a TOML config")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None, help="output directory")

    fig = sub.add_parser("figure", parents=[common], help="write the CSV panels of one figure")
    fig.add_argument("name", help=", ".join(FIGURES))
    fig.add_argument("--out", type=Path, default=None)
    fig.add_argument("--quick", action="store_true", help="reduced parameter ranges")

    ver = sub.add_parser("verify", parents=[common], help="cross-check the engine against oracles")
    ver.add_argument("--quick", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = getattr(args, "threads", 1)
    lam = getattr(args, "lam", None)
    gamma = getattr(args, "gamma", None)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if lam is not None and lam <= 0:
        print("error: --lambda must be positive", file=sys.stderr)
        return EXIT_CONFIG
    if gamma is not None and gamma < 0:
        print("error: --gamma must be >= 0", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "run":
        try:
            configs = [apply_overrides(c, lam, gamma) for c in load_config(args.config)]
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        out_dir = args.out if args.out is not None else default_output_dir()
        for cfg in configs:
            try:
                path = run_experiment(cfg, out_dir, threads)
            except ConfigError as exc:
                print(f"config error in {cfg.name}: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            except (NumericError, np.linalg.LinAlgError) as exc:
                print(f"numeric error in {cfg.name} ({cfg.task}): {exc}", file=sys.stderr)
                return EXIT_NUMERIC
            print(f"{cfg.name}: {cfg.task} -> {path}")
        return EXIT_OK

    if args.command == "figure":
        out_dir = args.out if args.out is not None else default_output_dir()
        try:
            paths = figure(args.name, out_dir, lam if lam is not None else 1.0, gamma,
                           args.quick, threads)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (NumericError, np.linalg.LinAlgError) as exc:
            print(f"numeric error in figure {args.name}: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        for p in paths:
            print(p)
        return EXIT_OK

    try:
        results = verify(quick=args.quick)
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"numeric error in verify: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.check:<26} residual={r.residual:.3e}  tol={r.tolerance:.0e}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
