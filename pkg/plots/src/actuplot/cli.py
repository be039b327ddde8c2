"""Command-line entry point.

    actuplot render --figure fig4 --runs a.csv b.csv ... --out fig4.png
                    [--events events.csv] [--title TEXT]

Exit codes: 0 ok, 1 bad input.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURES, FigureSpec, RenderError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actuplot", description="Render actusim experiment CSVs into figures."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    cmd = sub.add_parser("render", help="render one figure from run CSVs")
    cmd.add_argument("--figure", required=True, choices=FIGURES)
    cmd.add_argument("--runs", required=True, nargs="+", metavar="RUN_CSV")
    cmd.add_argument("--out", required=True, help="output image path")
    cmd.add_argument("--events", help="events.csv to shade (fig8)")
    cmd.add_argument("--title", help="figure title override")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        figure_id=args.figure,
        run_paths=args.runs,
        out_path=args.out,
        events_path=args.events,
        title=args.title,
    )
    try:
        out = render(spec)
    except (RenderError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
