"""Figure rendering for pedflow run directories.

Three figure types mirror the simulator's comparison outputs: density
heatmaps at snapshot times (micro and macro panels share one color
scale), mass-balance curves per cut, and L1/L2 error curves. Obstacles
and walls are drawn as bold outlines on heatmaps. Rendering is a pure
read-only consumer of the run directory.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    RunGeometry,
    SchemaError,
    discover_snapshots,
    read_density,
    read_geometry,
    read_table,
)

__all__ = ["PlotJob", "RenderResult", "render", "render_heatmap",
           "render_mass_balance", "render_errors"]

FIGURE_TYPES = ("heatmap", "mass_balance", "errors")


@dataclass
class PlotJob:
    run_dir: Path
    figure: str  # heatmap | mass_balance | errors
    out_path: Path
    tier: str = "both"  # heatmap only: micro | macro | both
    times: tuple[float, ...] | None = None  # heatmap only: subset of snapshots


@dataclass
class RenderResult:
    out_path: Path
    panels: int
    color_scale_max: float | None = None


def render(job: PlotJob) -> RenderResult:
    if job.figure == "heatmap":
        return render_heatmap(job.run_dir, job.out_path, tier=job.tier, times=job.times)
    if job.figure == "mass_balance":
        return render_mass_balance(job.run_dir, job.out_path)
    if job.figure == "errors":
        return render_errors(job.run_dir, job.out_path)
    raise ValueError(f"unknown figure type {job.figure!r}; pick one of {FIGURE_TYPES}")


def _draw_boundaries(ax, geometry: RunGeometry | None) -> None:
    if geometry is None:
        return
    x0, x1, y0, y1 = geometry.window
    ax.plot([x0, x1], [y0, y0], color="black", linewidth=2.5)
    ax.plot([x0, x1], [y1, y1], color="black", linewidth=2.5)
    for ox0, ox1, oy0, oy1 in geometry.obstacles:
        ax.plot([ox0, ox1, ox1, ox0, ox0], [oy0, oy0, oy1, oy1, oy0],
                color="black", linewidth=2.5)


def render_heatmap(run_dir, out_path, tier: str = "both", times=None) -> RenderResult:
    """One panel per (tier, snapshot time); a single shared color scale
    across every panel, so micro/macro at the same time are directly
    comparable."""
    snapshots = discover_snapshots(run_dir)
    tiers = [t for t in ("micro", "macro") if snapshots[t]] if tier == "both" else [tier]
    if not tiers or any(not snapshots[t] for t in tiers):
        raise SchemaError(run_dir, None, f"no density snapshots for tier {tier!r}")

    available = sorted(set.intersection(*(set(snapshots[t]) for t in tiers)))
    if times is not None:
        missing = [t for t in times if t not in available]
        if missing:
            raise SchemaError(run_dir, None, f"snapshot times {missing} not in run")
        available = sorted(times)

    fields = {(t, ts): read_density(snapshots[t][ts], t) for t in tiers for ts in available}
    vmax = max(float(f.values.max()) for f in fields.values())
    vmax = vmax if vmax > 0 else 1.0
    geometry = read_geometry(run_dir)

    n_rows, n_cols = len(tiers), len(available)
    fig, axes = plt.subplots(
        n_rows, n_cols, figsize=(4.2 * n_cols, 1.9 * n_rows + 0.8),
        squeeze=False, constrained_layout=True,
    )
    mesh = None
    for r, t in enumerate(tiers):
        for c, ts in enumerate(available):
            ax = axes[r][c]
            field = fields[(t, ts)]
            mesh = ax.imshow(field.values.T, origin="lower", extent=field.extent,
                             vmin=0.0, vmax=vmax, aspect="equal", cmap="viridis")
            _draw_boundaries(ax, geometry)
            ax.set_title(f"{t}, t = {ts:g}")
            ax.set_xlabel("x [m]")
            if c == 0:
                ax.set_ylabel("y [m]")
    fig.colorbar(mesh, ax=[ax for row in axes for ax in row], label="density [1/m^2]",
                 shrink=0.9)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return RenderResult(Path(out_path), n_rows * n_cols, vmax)


def render_mass_balance(run_dir, out_path) -> RenderResult:
    """Micro (solid) and macro (dashed) mass-balance curves, one color
    per cut, on shared axes."""
    table = read_table(Path(run_dir) / "mass_balance.csv", ["t", "tier"], ["mb_"])
    cuts = [name for name in table if name.startswith("mb_")]
    if not cuts:
        raise SchemaError(Path(run_dir) / "mass_balance.csv", 1, "no mb_<cut> columns")
    tiers = table["tier"]
    t = table["t"]
    fig, ax = plt.subplots(figsize=(6.5, 4.2), constrained_layout=True)
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for k, column in enumerate(cuts):
        color = colors[k % len(colors)]
        for tier_name, style in (("micro", "-"), ("macro", "--")):
            sel = tiers == tier_name
            if not np.any(sel):
                continue
            order = np.argsort(t[sel].astype(float))
            ax.plot(t[sel].astype(float)[order], table[column][sel][order], style,
                    color=color, label=f"{tier_name}, cut {column[3:]}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("mass at or left of cut")
    ax.set_ylim(-0.02, 1.05)
    ax.legend()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return RenderResult(Path(out_path), 1)


def render_errors(run_dir, out_path) -> RenderResult:
    """L1 and L2 density-difference norms against time on one axis set."""
    table = read_table(Path(run_dir) / "error_vs_time.csv", ["t", "l1", "l2"])
    fig, ax = plt.subplots(figsize=(6.5, 4.2), constrained_layout=True)
    ax.plot(table["t"], table["l1"], "o-", label="L1")
    ax.plot(table["t"], table["l2"], "s--", label="L2")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("density difference norm")
    ax.set_ylim(bottom=0.0)
    ax.legend()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return RenderResult(Path(out_path), 1)
