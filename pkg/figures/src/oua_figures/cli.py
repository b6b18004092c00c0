"""Command-line renderer.

    oua-figures render --figure fig2 --results DIR --out fig2.png
    oua-figures render --figure fig2 --results DIR --list
"""

from __future__ import annotations

import argparse
import sys

from .loading import FigureError
from .render import FIGURES, FigureSpec, plan, render, series_map


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oua-figures",
        description="Rebuild multi-panel figures from experiment result directories.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("render", help="draw one figure from a results directory")
    p.add_argument("--figure", required=True, choices=FIGURES, help="which figure to draw")
    p.add_argument("--results", required=True, help="results directory to read")
    p.add_argument("--out", help="output image path (.png, .svg, ...)")
    p.add_argument(
        "--panels", help="comma-separated panel titles to keep (default: all panels)"
    )
    p.add_argument(
        "--list",
        action="store_true",
        dest="list_only",
        help="print the series-to-CSV mapping instead of rendering",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    panels = tuple(p.strip() for p in args.panels.split(",")) if args.panels else None
    spec = FigureSpec(
        figure=args.figure, results_dir=args.results, out=args.out, panels=panels
    )
    try:
        if args.list_only:
            for line in series_map(plan(spec)):
                print(line)
            return 0
        path = render(spec)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
