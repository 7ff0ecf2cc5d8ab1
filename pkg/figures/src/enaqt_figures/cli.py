"""Command-line figure renderer: one figure per invocation."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FIGURE_IDS, FigureError, FigureSpec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="enaqt-figures",
        description="Render static figures from transport-sweep CSV outputs",
    )
    parser.add_argument("figure", choices=FIGURE_IDS, help="figure id to render")
    parser.add_argument("--input", required=True, type=Path, nargs="+", help="input CSV file(s)")
    parser.add_argument("--out", required=True, type=Path, help="output image path (.png/.svg)")
    parser.add_argument("--label", action="append", default=None, help="panel label (repeatable)")
    parser.add_argument("--eta", type=float, action="append", default=None,
                        help="restrict to this gradient (repeatable)")
    parser.add_argument("--bin-width", type=float, default=0.5, help="IPR bin width for overlays")
    parser.add_argument("--steady-value", type=float, default=None,
                        help="reference level drawn on dynamics figures")
    args = parser.parse_args(argv)

    options = {"bin_width": args.bin_width}
    if args.label:
        options["labels"] = args.label
    if args.eta:
        options["eta"] = args.eta
    if args.steady_value is not None:
        options["steady_value"] = args.steady_value

    spec = FigureSpec(args.figure, tuple(args.input), args.out, options)
    try:
        path = render(spec)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
