"""Command-line experiment runner."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigurationError
from .experiment import (
    ExperimentConfig,
    parse_config_text,
    parse_modes,
    parse_seeds,
    run_experiment,
)
from .metrics import summary_text
from .placement import STRATEGY_ORDER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fogplace",
        description="Run the placement-strategy latency study and write CSV reports.",
    )
    parser.add_argument("--config", metavar="PATH",
                        help="scenario file (KEY = value lines); defaults cover the standard scenario")
    parser.add_argument("--out", metavar="DIR", help="output directory (default: results)")
    parser.add_argument("--seeds", metavar="N",
                        help="seed count (N means seeds 0..N-1) or comma-separated list")
    parser.add_argument("--strategies", metavar="LIST",
                        help="comma-separated subset of: " + ", ".join(STRATEGY_ORDER))
    parser.add_argument("--modes", metavar="LIST",
                        help="comma-separated subset of: app_based, service_based")
    parser.add_argument("--jobs", type=int, metavar="N",
                        help="worker processes for the sweep (default 1)")
    parser.add_argument("--trace", action="store_true",
                        help="write per-event trace logs under <out>/traces/")
    parser.add_argument("--quiet", action="store_true", help="suppress progress and summary output")
    return parser


def load_config(args) -> ExperimentConfig:
    if args.config:
        config = parse_config_text(Path(args.config).read_text(encoding="utf-8"))
    else:
        config = ExperimentConfig()
    if args.out:
        config = replace(config, out_dir=args.out)
    if args.seeds:
        config = replace(config, seeds=parse_seeds(args.seeds))
    if args.strategies:
        config = replace(config, strategies=tuple(
            s.strip() for s in args.strategies.split(",") if s.strip()))
    if args.modes:
        config = replace(config, modes=parse_modes(args.modes))
    if args.jobs:
        config = replace(config, jobs=args.jobs)
    if args.trace:
        config = replace(config, trace=True)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        progress = None if args.quiet else lambda line: print(line, flush=True)
        report = run_experiment(config, progress=progress)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        print()
        print(summary_text(report.summaries, report.verdicts), end="")
        print(f"reports written to {report.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
