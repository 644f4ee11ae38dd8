"""Panel renderer CLI: ``render --figure fig5 --panel a --in fig5_a.csv --out fig5_a.svg``.

Exit codes: 0 success, 2 unreadable/mismatched input (schema failures name
the offending columns).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureSpec, RenderError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="render",
                                     description="Render a harness CSV panel to SVG/PNG")
    parser.add_argument("--figure", required=True,
                        choices=["fig4", "fig5", "fig6", "fig7", "fig8", "fig9"])
    parser.add_argument("--panel", required=True, choices=["a", "b", "c"])
    parser.add_argument("--in", dest="input_csv", required=True, type=Path)
    parser.add_argument("--out", dest="output_image", required=True, type=Path)
    parser.add_argument("--log-y", action="store_true",
                        help="logarithmic y axis (handy for the chain filtering-ability panels)")
    parser.add_argument("--title")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(figure_id=args.figure, panel=args.panel,
                      input_csv=args.input_csv, output_image=args.output_image,
                      log_y=args.log_y, title=args.title)
    try:
        path = render(spec)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
