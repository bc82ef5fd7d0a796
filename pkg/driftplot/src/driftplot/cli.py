"""Command-line figure rendering from drift-recover CSV outputs."""

from __future__ import annotations

import argparse
import sys

from .fields import CsvFormatError
from .render import LAYOUTS, PlotJob, render_error_curve, render_heatmap


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftplot",
        description="Render heatmaps and error curves from reconstruction CSV files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plot-fields", help="heatmap panels from field CSVs")
    p.add_argument("--layout", default="single", choices=sorted(LAYOUTS))
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--per-panel-range", action="store_true", help="scale each panel separately")
    p.add_argument("--title", help="figure title (default: from a manifest.json beside the inputs)")
    p.add_argument("inputs", nargs="+", help="field CSV files, one per panel")
    p.set_defaults(fn=_plot_fields)

    p = sub.add_parser("plot-errors", help="semilog error curve from a convergence CSV")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--title", help="figure title")
    p.add_argument("convergence", help="convergence CSV (k, increment, rel_err)")
    p.set_defaults(fn=_plot_errors)

    return parser


def _plot_fields(args) -> int:
    job = PlotJob(
        inputs=tuple(args.inputs),
        out=args.out,
        layout=args.layout,
        shared_range=not args.per_panel_range,
        title=args.title,
    )
    result = render_heatmap(job)
    print(f"wrote {result.out} ({result.panels} panels, {result.size_px[0]}x{result.size_px[1]}px)")
    return 0


def _plot_errors(args) -> int:
    result = render_error_curve(args.convergence, args.out, title=args.title)
    print(f"wrote {result.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CsvFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
