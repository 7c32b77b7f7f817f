"""Run orchestration and CSV artifact writing.

All artifacts are plain CSV with deterministic formatting (shortest
round-trip float repr), so identical runs produce byte-identical files.

Files written into a run directory:

    scenario.json                resolved scenario, round-trippable
    micro_t<time>.csv            i,j,x_center,y_center,u_mic
    macro_t<time>.csv            i,j,x_center,y_center,u0,u1
    macro_diagnostics.csv        t,dt,total_mass,mb_<cut>...
    micro_replicates.csv         replicate,stopped_t<time>...,crossing_x<cut>...
    micro_mass_balance.csv       t,mb_<cut>...
    error_vs_time.csv            t,l1,l2                     (compare only)
    mass_balance.csv             t,tier,mb_<cut>...          (compare only)
    crossing.csv                 tier,cut,definition,time    (compare only)
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .macro import MacroRun, run_macro
from .metrics import ComparisonReport, crossing_time, lp_error, mass_balance_grid
from .micro import EnsembleResult, run_ensemble
from .scenario import Scenario, scenario_to_dict

__all__ = [
    "fmt",
    "time_tag",
    "write_micro_outputs",
    "write_macro_outputs",
    "write_comparison_outputs",
    "run_micro_command",
    "run_macro_command",
    "run_compare_command",
    "MACRO_CROSSING_THETA",
]

MACRO_CROSSING_THETA = 0.999


def fmt(value) -> str:
    """Stable scalar formatting: shortest float repr, NaN as empty."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if np.isnan(v):
        return ""
    return repr(v)


def time_tag(t: float) -> str:
    return f"{t:g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_scenario(scenario: Scenario, out: Path) -> None:
    out.joinpath("scenario.json").write_text(
        json.dumps(scenario_to_dict(scenario), indent=2) + "\n"
    )


def _grid_rows(grid, columns) -> list:
    cx, cy = grid.centers_x, grid.centers_y
    rows = []
    for i in range(grid.nx):
        for j in range(grid.ny):
            rows.append([str(i), str(j), fmt(cx[i]), fmt(cy[j])]
                        + [fmt(col[i, j]) for col in columns])
    return rows


def write_micro_outputs(result: EnsembleResult, out: Path) -> None:
    for k, t in enumerate(result.snapshot_times):
        _write_csv(out / f"micro_t{time_tag(t)}.csv",
                   ["i", "j", "x_center", "y_center", "u_mic"],
                   _grid_rows(result.grid, [result.density[k]]))
    header = (["replicate"]
              + [f"stopped_t{time_tag(t)}" for t in result.snapshot_times]
              + [f"crossing_x{time_tag(c)}" for c in result.cuts])
    rows = []
    for m in range(result.stopped_fraction.shape[0]):
        rows.append([str(m)] + [fmt(v) for v in result.stopped_fraction[m]]
                    + [fmt(v) for v in result.crossing_times[m]])
    _write_csv(out / "micro_replicates.csv", header, rows)
    _write_csv(out / "micro_mass_balance.csv",
               ["t"] + [f"mb_{time_tag(c)}" for c in result.cuts],
               [[fmt(t)] + [fmt(v) for v in result.mass_balance[k]]
                for k, t in enumerate(result.snapshot_times)])


def write_macro_outputs(run: MacroRun, out: Path) -> None:
    for t, fld in run.snapshots:
        _write_csv(out / f"macro_t{time_tag(t)}.csv",
                   ["i", "j", "x_center", "y_center", "u0", "u1"],
                   _grid_rows(run.grid, [fld.u0, fld.u1]))
    mb = run.mass_balance_array()
    rows = []
    for k, t in enumerate(run.times):
        rows.append([fmt(t), fmt(run.dts[k]), fmt(run.total_mass[k])]
                    + [fmt(v) for v in mb[k]])
    _write_csv(out / "macro_diagnostics.csv",
               ["t", "dt", "total_mass"] + [f"mb_{time_tag(c)}" for c in run.cuts],
               rows)


def build_comparison(scenario: Scenario, ensemble: EnsembleResult,
                     macro: MacroRun) -> ComparisonReport:
    """Per-snapshot L1/L2 errors, both mass-balance curves, crossings."""
    grid = ensemble.grid
    times = scenario.snapshot_times
    macro_by_time = {time_tag(t): fld for t, fld in macro.snapshots}
    l1, l2, mb_mac = [], [], []
    for k, t in enumerate(times):
        fld = macro_by_time[time_tag(t)]
        total = fld.total()
        l1.append(lp_error(ensemble.density[k], total, grid.cell_area, 1))
        l2.append(lp_error(ensemble.density[k], total, grid.cell_area, 2))
        mb_mac.append([mass_balance_grid(total, grid, c) for c in scenario.cuts])

    crossing = []
    diag_mb = macro.mass_balance_array()
    diag_t = np.asarray(macro.times)
    for c, cut in enumerate(scenario.cuts):
        tc = crossing_time(diag_t, 1.0 - diag_mb[:, c], MACRO_CROSSING_THETA)
        crossing.append(("macro", cut, f"theta={MACRO_CROSSING_THETA}", tc))
        reps = ensemble.crossing_times[:, c]
        reached = reps[np.isfinite(reps)]
        mic_time = float(reached.mean()) if reached.size else None
        crossing.append(("micro", cut, "all_agents_mean", mic_time))

    return ComparisonReport(
        times=times,
        cuts=scenario.cuts,
        l1=np.asarray(l1),
        l2=np.asarray(l2),
        mb_micro=np.asarray(ensemble.mass_balance),
        mb_macro=np.asarray(mb_mac),
        crossing=crossing,
    )


def write_comparison_outputs(report: ComparisonReport, out: Path) -> None:
    _write_csv(out / "error_vs_time.csv", ["t", "l1", "l2"],
               [[fmt(t), fmt(report.l1[k]), fmt(report.l2[k])]
                for k, t in enumerate(report.times)])
    header = ["t", "tier"] + [f"mb_{time_tag(c)}" for c in report.cuts]
    rows = []
    for k, t in enumerate(report.times):
        rows.append([fmt(t), "micro"] + [fmt(v) for v in report.mb_micro[k]])
        rows.append([fmt(t), "macro"] + [fmt(v) for v in report.mb_macro[k]])
    _write_csv(out / "mass_balance.csv", header, rows)
    _write_csv(out / "crossing.csv", ["tier", "cut", "definition", "time"],
               [[tier, fmt(cut), definition, fmt(t)]
                for tier, cut, definition, t in report.crossing])


def _prep_dir(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_micro_command(scenario: Scenario, out_dir, workers: int = 1) -> EnsembleResult:
    out = _prep_dir(out_dir)
    result = run_ensemble(scenario, workers=workers)
    _write_scenario(scenario, out)
    write_micro_outputs(result, out)
    return result


def run_macro_command(scenario: Scenario, out_dir) -> MacroRun:
    out = _prep_dir(out_dir)
    run = run_macro(scenario)
    _write_scenario(scenario, out)
    write_macro_outputs(run, out)
    return run


def run_compare_command(scenario: Scenario, out_dir, workers: int = 1) -> ComparisonReport:
    out = _prep_dir(out_dir)
    ensemble = run_ensemble(scenario, workers=workers)
    macro = run_macro(scenario)
    report = build_comparison(scenario, ensemble, macro)
    _write_scenario(scenario, out)
    write_micro_outputs(ensemble, out)
    write_macro_outputs(macro, out)
    write_comparison_outputs(report, out)
    return report
