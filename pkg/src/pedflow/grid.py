"""Uniform rectangular grid over the recording window.

Cells are half-open boxes [x_i, x_i + dx) x [y_j, y_j + dy); fields are
stored as (nx, ny) arrays of cell means.  Cells whose center falls
strictly inside an obstacle are masked and carry no density.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import WalkableDomain

__all__ = ["Grid"]


@dataclass(frozen=True)
class Grid:
    x_min: float
    y_min: float
    dx: float
    dy: float
    nx: int
    ny: int

    @classmethod
    def from_domain(cls, domain: WalkableDomain, dx: float, dy: float) -> "Grid":
        b = domain.bounds
        nx = round(b.width / dx)
        ny = round(b.height / dy)
        if abs(nx * dx - b.width) > 1e-9 or abs(ny * dy - b.height) > 1e-9:
            raise ValueError(
                f"cell sizes ({dx}, {dy}) do not divide the window "
                f"{b.width} x {b.height}"
            )
        return cls(b.x_min, b.y_min, dx, dy, nx, ny)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def centers_x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def centers_y(self) -> np.ndarray:
        return self.y_min + (np.arange(self.ny) + 0.5) * self.dy

    def centers(self) -> np.ndarray:
        """Cell centers as an (nx, ny, 2) array."""
        cx, cy = np.meshgrid(self.centers_x, self.centers_y, indexing="ij")
        return np.stack([cx, cy], axis=-1)

    def obstacle_mask(self, domain: WalkableDomain) -> np.ndarray:
        """(nx, ny) bool, True where the cell center sits strictly
        inside an obstacle."""
        c = self.centers()
        mask = np.zeros((self.nx, self.ny), dtype=bool)
        for obs in domain.obstacles:
            mask |= obs.contains(c[..., 0], c[..., 1], strict=True)
        return mask

    def locate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Half-open cell indices for points; returns (i, j, inside)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        i = np.floor((pts[:, 0] - self.x_min) / self.dx).astype(np.int64)
        j = np.floor((pts[:, 1] - self.y_min) / self.dy).astype(np.int64)
        inside = (i >= 0) & (i < self.nx) & (j >= 0) & (j < self.ny)
        return i, j, inside

    def histogram(self, points: np.ndarray) -> tuple[np.ndarray, int]:
        """Integer counts per cell plus the number of in-window points."""
        i, j, inside = self.locate(points)
        counts = np.bincount(
            i[inside] * self.ny + j[inside], minlength=self.nx * self.ny
        ).reshape(self.nx, self.ny)
        return counts, int(inside.sum())
