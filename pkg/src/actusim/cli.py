"""Command-line entry point.

    actusim <scenario> [--config FILE] [--seed N] [--out DIR] [--set SECTION.key=value ...]

Exit codes: 0 ok, 1 bad input, 2 run failure.
"""

from __future__ import annotations

import argparse
import sys

from .configio import ConfigError
from .experiments import SCENARIOS, run
from .metrics import UndefinedMetric
from .simcore import SimulationDiverged
from .tuning import TuningFailed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actusim",
        description="Deterministic actuation-module simulator and experiment runner.",
    )
    parser.add_argument("scenario", choices=SCENARIOS, help="experiment to run")
    parser.add_argument("--config", help="config file overriding the preset")
    parser.add_argument("--seed", type=int, help="override the simulation seed")
    parser.add_argument("--out", help="artifact directory (default: out/<scenario>)")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.key=value",
        help="override one config value; repeatable",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"sim.seed={args.seed}")
    out_dir = args.out if args.out is not None else f"out/{args.scenario}"
    try:
        results = run(args.scenario, args.config, out_dir, overrides)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SimulationDiverged, TuningFailed, UndefinedMetric) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2
    for result in results:
        metrics = result.metrics
        summary = ", ".join(
            f"{key}={value:.6g}" if value is not None else f"{key}=n/a"
            for key, value in metrics.as_dict().items()
        )
        print(f"{result.name}: {summary}")
        if result.events:
            print(f"{result.name}: {len(result.events)} detection event(s)")
    print(f"artifacts written to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
