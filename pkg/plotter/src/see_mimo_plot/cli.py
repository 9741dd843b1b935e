"""Command line: render one sweep CSV to one image file."""
from __future__ import annotations

import argparse
import sys

from .plotter import EmptyData, PlotSpec, SchemaMismatch, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="see-mimo-plot",
        description="Render a secure-EE sweep CSV as a line chart",
    )
    parser.add_argument("csv", help="sweep CSV produced by the simulation toolkit")
    parser.add_argument("--out", required=True, help="output image path (e.g. fig7.png)")
    parser.add_argument(
        "--annotate-crossover",
        action="store_true",
        help="mark where the cell-division and antenna-selection series cross",
    )
    parser.add_argument("--title", default="", help="optional chart title")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        csv_path=args.csv,
        out_path=args.out,
        annotate_crossover=args.annotate_crossover,
        title=args.title,
    )
    try:
        info = render(spec)
    except (SchemaMismatch, EmptyData, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {info.out_path} ({len(info.series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
