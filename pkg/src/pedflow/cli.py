"""Command-line entry point.

    pedflow validate --scenario <path-or-preset>
    pedflow micro    --scenario <...> [--seed N] [--out DIR] [--workers K] [--snapshots T1,T2,...]
    pedflow macro    --scenario <...> [--seed N] [--out DIR] [--snapshots ...]
    pedflow compare  --scenario <...> [--seed N] [--out DIR] [--workers K] [--snapshots ...]

Exit codes: 0 success, 2 scenario/validation error, 3 runtime failure.
Output directory precedence: --out, then $PEDFLOW_OUT, then the
scenario's out_dir, then ./runs/<scenario name>.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .outputs import run_compare_command, run_macro_command, run_micro_command
from .scenario import ScenarioError, resolve_scenario, with_overrides

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pedflow",
                                     description="Two-tier pedestrian flow simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("validate", "check a scenario file and exit"),
        ("micro", "run the agent ensemble and write density/statistics CSVs"),
        ("macro", "run the density solver and write snapshot/diagnostic CSVs"),
        ("compare", "run both tiers and write the comparison CSVs"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True,
                       help="scenario JSON path or bundled preset name")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--out", default=None, help="run output directory")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel replicate workers (results are identical)")
        p.add_argument("--snapshots", default=None,
                       help="comma-separated snapshot times overriding the scenario")
    return parser


def _error_line(exc: Exception, exit_code: int) -> None:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                      "exit_code": exit_code}), file=sys.stderr)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scenario = resolve_scenario(args.scenario)
        snapshots = None
        if args.snapshots is not None:
            snapshots = [float(tok) for tok in args.snapshots.split(",") if tok.strip()]
        scenario = with_overrides(scenario, seed=args.seed, snapshot_times=snapshots)
        out_dir = (args.out or os.environ.get("PEDFLOW_OUT")
                   or scenario.out_dir or os.path.join("runs", scenario.name))
    except ScenarioError as exc:
        _error_line(exc, EXIT_VALIDATION)
        return EXIT_VALIDATION
    except ValueError as exc:
        _error_line(exc, EXIT_VALIDATION)
        return EXIT_VALIDATION

    if args.command == "validate":
        print(f"scenario '{scenario.name}' is valid")
        return EXIT_OK

    try:
        if args.command == "micro":
            run_micro_command(scenario, out_dir, workers=args.workers)
        elif args.command == "macro":
            run_macro_command(scenario, out_dir)
        else:
            run_compare_command(scenario, out_dir, workers=args.workers)
    except Exception as exc:  # simulation-time failure
        _error_line(exc, EXIT_RUNTIME)
        return EXIT_RUNTIME
    print(f"{args.command} run of '{scenario.name}' written to {out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
