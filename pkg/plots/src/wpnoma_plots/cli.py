"""Command line front end: plots <kind> --in sweep.csv --out figure.png

Exit codes follow the sweep CLI convention: 0 success, 2 bad arguments or
bad input CSV, 3 runtime failure while rendering.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import KINDS, EmptyInput, FigureSpec, SchemaMismatch, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render a wpnoma sweep CSV into a figure (PNG + SVG).",
    )
    parser.add_argument("kind", choices=KINDS, help="which sweep the CSV came from")
    parser.add_argument(
        "--in", dest="input", required=True, metavar="CSV",
        help="input CSV written by the wpnoma CLI",
    )
    parser.add_argument(
        "--out", dest="output", required=True, metavar="IMG",
        help="output image path ending in .png or .svg; the sibling format "
        "is written alongside",
    )
    parser.add_argument(
        "--log-y", action="store_true", help="log scale on the y axis"
    )
    parser.add_argument(
        "--legend-loc", default="best", help="matplotlib legend location"
    )
    parser.add_argument("--dpi", type=int, default=150, help="raster resolution")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code) if exc.code else 0
    src = Path(args.input)
    if not src.is_file():
        print(f"plots: input CSV not found: {src}", file=sys.stderr)
        return 2
    try:
        spec = FigureSpec(
            input_csv=src,
            kind=args.kind,
            output=Path(args.output),
            log_y=args.log_y,
            legend_loc=args.legend_loc,
            dpi=args.dpi,
        )
        raster, vector = render(spec)
    except (SchemaMismatch, EmptyInput, ValueError) as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"plots: render failed: {exc}", file=sys.stderr)
        return 3
    print(raster)
    print(vector)
    return 0


if __name__ == "__main__":
    sys.exit(main())
