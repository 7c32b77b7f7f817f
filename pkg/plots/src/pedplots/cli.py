"""Command-line figure rendering:

    plots heatmap      --run <dir> --out <file> [--tier micro|macro|both] [--times T1,T2]
    plots mass_balance --run <dir> --out <file>
    plots errors       --run <dir> --out <file>

Exit codes: 0 success, 2 schema mismatch (message names the offending
file and line), 3 unexpected failure.
"""
from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_TYPES, PlotJob, render
from .io import SchemaError

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots",
                                     description="Render figures from a pedflow run directory")
    sub = parser.add_subparsers(dest="figure", required=True)
    for figure in FIGURE_TYPES:
        p = sub.add_parser(figure)
        p.add_argument("--run", required=True, help="run directory with the CSV artifacts")
        p.add_argument("--out", required=True, help="output image path (png, pdf, svg, ...)")
        if figure == "heatmap":
            p.add_argument("--tier", choices=["micro", "macro", "both"], default="both")
            p.add_argument("--times", default=None,
                           help="comma-separated snapshot times (default: all shared)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    times = None
    if getattr(args, "times", None):
        times = tuple(float(tok) for tok in args.times.split(",") if tok.strip())
    job = PlotJob(run_dir=args.run, figure=args.figure, out_path=args.out,
                  tier=getattr(args, "tier", "both"), times=times)
    try:
        result = render(job)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # rendering failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {result.out_path} ({result.panels} panel(s))")
    return 0


if __name__ == "__main__":
    sys.exit(main())
