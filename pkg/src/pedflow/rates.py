"""State- and space-dependent stop/go switching rates.

Each of the two agent states (0 = stopped, 1 = walking) carries its own
piecewise-constant rate map: a default value plus a list of regions
(discs or x-axis bands) with per-region values.  The first matching
region wins.  Rates are events per unit time and must be nonnegative
and bounded; the uniform bound caps the admissible micro time step.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RateRegion", "DiscRegion", "BandRegion", "RateMap", "RatePair"]


class RateRegion:
    """Region of constant rate; subclasses implement membership."""

    value: float

    def contains(self, x, y):  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class DiscRegion(RateRegion):
    """Disc ||(x,y) - center|| <= radius."""

    center: tuple[float, float]
    radius: float
    value: float

    def contains(self, x, y):
        return (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2 <= self.radius**2


@dataclass(frozen=True)
class BandRegion(RateRegion):
    """Vertical band x_min <= x <= x_max (all y)."""

    x_min: float
    x_max: float
    value: float

    def contains(self, x, y):
        return (x >= self.x_min) & (x <= self.x_max)


@dataclass(frozen=True)
class RateMap:
    """Piecewise-constant nonnegative rate over the plane."""

    default: float
    regions: tuple[RateRegion, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.default < 0 or any(r.value < 0 for r in self.regions):
            raise ValueError("rates must be nonnegative")

    def __call__(self, x, y):
        """Evaluate at (x, y); accepts scalars or arrays."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.full(np.broadcast(x, y).shape, self.default)
        assigned = np.zeros(out.shape, dtype=bool)
        for region in self.regions:
            hit = region.contains(x, y) & ~assigned
            out = np.where(hit, region.value, out)
            assigned |= hit
        if out.ndim == 0:
            return float(out)
        return out

    @property
    def sup(self) -> float:
        return max([self.default] + [r.value for r in self.regions])


@dataclass(frozen=True)
class RatePair:
    """The two rate maps: ``stopped`` drives 0 -> 1 flips, ``walking``
    drives 1 -> 0 flips."""

    stopped: RateMap
    walking: RateMap

    def __call__(self, status, x, y):
        """Rate at the agent's own state: status 0 reads the stopped
        map, status 1 the walking map.  Vectorized over all inputs."""
        status = np.asarray(status)
        lam0 = np.asarray(self.stopped(x, y))
        lam1 = np.asarray(self.walking(x, y))
        out = np.where(status == 0, lam0, lam1)
        if out.ndim == 0:
            return float(out)
        return out

    @property
    def sup_bound(self) -> float:
        """Uniform bound of the switching rate over states and space."""
        return max(self.stopped.sup, self.walking.sup)

    def max_dt(self) -> float:
        """Largest admissible micro time step (1 / sup_bound)."""
        if self.sup_bound == 0.0:
            return np.inf
        return 1.0 / self.sup_bound
