"""Comparison measures between the agent ensemble and the density model.

The two tiers are compared on a shared grid through discrete L^p norms
of the density difference, and through mass-balance curves: the mass at
or left of a vertical cut, whose complement measures crossing progress.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid

__all__ = [
    "lp_error",
    "mass_balance_grid",
    "mass_balance_points",
    "crossing_time",
    "ComparisonReport",
]


def lp_error(field_a: np.ndarray, field_b: np.ndarray, cell_area: float, p: float) -> float:
    """Discrete L^p norm of the cellwise difference:
    (dx dy sum |a - b|^p)^(1/p)."""
    a = np.asarray(field_a, dtype=float)
    b = np.asarray(field_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"grid shapes differ: {a.shape} vs {b.shape}")
    if p < 1:
        raise ValueError("p must be >= 1")
    return float((cell_area * (np.abs(a - b) ** p).sum()) ** (1.0 / p))


def mass_balance_grid(u: np.ndarray, grid: Grid, cut: float) -> float:
    """Mass at first coordinate <= cut.

    Columns entirely left of the cut count fully; the column straddling
    it contributes the linear fraction of its width.
    """
    u = np.asarray(u, dtype=float)
    left_edges = grid.x_min + np.arange(grid.nx) * grid.dx
    weight = np.clip((cut - left_edges) / grid.dx, 0.0, 1.0)
    return float(grid.cell_area * (weight * u.sum(axis=1)).sum())


def mass_balance_points(positions: np.ndarray, cut: float) -> float:
    """Fraction of agents at first coordinate <= cut."""
    x = np.asarray(positions, dtype=float)
    if x.ndim == 2:
        x = x[:, 0]
    return float(np.mean(x <= cut))


def crossing_time(times, crossed, theta: float):
    """First time the crossed fraction (1 - mass balance) reaches theta.

    Linear interpolation between samples; a jump segment resolves to its
    right endpoint.  Returns None when theta is never reached.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    t = np.asarray(times, dtype=float)
    c = np.asarray(crossed, dtype=float)
    if theta == 0.0:
        return float(t[0])
    hit = np.flatnonzero(c >= theta)
    if hit.size == 0:
        return None
    k = int(hit[0])
    if k == 0:
        return float(t[0])
    c0, c1 = c[k - 1], c[k]
    if c1 <= c0:
        return float(t[k])
    return float(t[k - 1] + (theta - c0) * (t[k] - t[k - 1]) / (c1 - c0))


@dataclass
class ComparisonReport:
    """Snapshot-by-snapshot error norms and mass-balance curves."""

    times: tuple[float, ...]
    cuts: tuple[float, ...]
    l1: np.ndarray  # (n_times,)
    l2: np.ndarray  # (n_times,)
    mb_micro: np.ndarray  # (n_times, n_cuts)
    mb_macro: np.ndarray  # (n_times, n_cuts)
    crossing: list = field(default_factory=list)  # (tier, cut, definition, time|None)
