"""CLI: ``cogviz plot <kind> --in artifact.json --out figure.png``."""

from __future__ import annotations

import argparse
import sys

from .plots import plot_boxplot, plot_chord, plot_curves, plot_headmap, plot_heatmap, plot_psd
from .schemas import ArtifactError

KINDS = ("chord", "heatmap", "headmap", "psd", "curves", "boxplot")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cogviz", description="render cogstate artifacts")
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot")
    plot.add_argument("kind", choices=KINDS)
    plot.add_argument("--in", dest="inputs", nargs="+", required=True,
                      help="artifact JSON path(s); boxplot accepts several")
    plot.add_argument("--out", required=True, help="output .png or .svg")
    plot.add_argument("--montage", help="montage JSON (required for headmap)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "boxplot":
            plot_boxplot(args.inputs, args.out)
        else:
            if len(args.inputs) != 1:
                raise ArtifactError(f"plot {args.kind} takes exactly one --in artifact")
            src = args.inputs[0]
            if args.kind == "chord":
                plot_chord(src, args.out)
            elif args.kind == "heatmap":
                plot_heatmap(src, args.out)
            elif args.kind == "headmap":
                if not args.montage:
                    raise ArtifactError("headmap needs --montage (from `cogstate report`)")
                plot_headmap(src, args.montage, args.out)
            elif args.kind == "psd":
                plot_psd(src, args.out)
            elif args.kind == "curves":
                plot_curves(src, args.out)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
