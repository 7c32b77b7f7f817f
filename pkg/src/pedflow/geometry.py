"""Walkable corridor geometry: walls, rectangular obstacles and the
norm-preserving boundary redirection of velocities.

The walkable region is a horizontal strip minus a set of axis-aligned
rectangular obstacles.  The strip's top and bottom edges are walls; the
left/right ends are open unless the domain is flagged closed.  Every
boundary element carries a unit normal pointing out of the walkable
region (into the wall or obstacle).

A velocity that points into a wall is rotated onto the wall tangent and
blended back toward the original direction with a smooth ramp of the
wall distance, so pedestrians slide along boundaries instead of being
pushed by singular forces.  The redirection preserves the speed exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "Rect",
    "WalkableDomain",
    "ReflectionParams",
    "smoothstep",
    "distance_to_boundary",
    "outward_normal",
    "tangent_of_normal",
    "redirect_velocities",
    "reflect_velocity",
    "reflect_velocities",
]


class DomainError(ValueError):
    """Raised for geometry queries outside the walkable set."""


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x_min, x_max] x [y_min, y_max]."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise DomainError(f"degenerate rectangle {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, x, y, *, strict: bool = False):
        """Vectorized point-in-rectangle test (strict = open interior)."""
        if strict:
            return (x > self.x_min) & (x < self.x_max) & (y > self.y_min) & (y < self.y_max)
        return (x >= self.x_min) & (x <= self.x_max) & (y >= self.y_min) & (y <= self.y_max)


@dataclass(frozen=True)
class WalkableDomain:
    """Strip [x_min,x_max] x [y_min,y_max] minus obstacle interiors.

    ``bounds`` doubles as the recording window.  Walls are the strip's
    top/bottom edges plus all obstacle boundaries; the strip extends
    without side walls in x, so positions may leave the window while
    remaining walkable.  ``closed`` marks test boxes whose left/right
    window edges also act as walls (used by the macro solver only).
    """

    bounds: Rect
    obstacles: tuple[Rect, ...] = field(default_factory=tuple)
    closed: bool = False

    def __post_init__(self):
        for k, obs in enumerate(self.obstacles):
            if not (
                obs.x_min >= self.bounds.x_min - 1e-12
                and obs.x_max <= self.bounds.x_max + 1e-12
                and obs.y_min >= self.bounds.y_min - 1e-12
                and obs.y_max <= self.bounds.y_max + 1e-12
            ):
                raise DomainError(f"obstacle {k} extends outside the strip")
            for other in self.obstacles[k + 1 :]:
                if (
                    obs.x_min < other.x_max
                    and other.x_min < obs.x_max
                    and obs.y_min < other.y_max
                    and other.y_min < obs.y_max
                ):
                    raise DomainError("obstacles overlap")

    # -- point classification -------------------------------------------------

    def is_walkable(self, x, y):
        """True where (x, y) lies in the closed strip and outside every
        open obstacle interior.  Vectorized."""
        ok = (y >= self.bounds.y_min) & (y <= self.bounds.y_max)
        for obs in self.obstacles:
            ok &= ~obs.contains(x, y, strict=True)
        return ok

    # -- distance / normal ----------------------------------------------------

    def distance_and_normal(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Distance to the nearest wall/obstacle edge and its outward normal.

        ``points`` has shape (n, 2).  Returns (dist (n,), normal (n, 2)).
        The normal points out of the walkable region.  Ties on the
        medial axis resolve to the element listed first: top wall,
        bottom wall, then obstacles in declaration order.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        n = pts.shape[0]

        dists = [self.bounds.y_max - y, y - self.bounds.y_min]
        normals = [
            np.tile([0.0, 1.0], (n, 1)),
            np.tile([0.0, -1.0], (n, 1)),
        ]
        for obs in self.obstacles:
            d, nv = _rect_distance_normal(x, y, obs)
            dists.append(d)
            normals.append(nv)

        stack = np.stack(dists, axis=0)  # (n_elems, n)
        best = np.argmin(stack, axis=0)  # first occurrence wins ties
        dist = stack[best, np.arange(n)]
        normal = np.stack(normals, axis=0)[best, np.arange(n)]
        return dist, normal

    def project_inside(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Clamp points back into the walkable set.

        Returns (projected copy, mask of points that moved).  Points
        above/below the strip are clamped to the wall; points inside an
        obstacle are pushed to its nearest edge.
        """
        pts = np.array(points, dtype=float, copy=True)
        moved = ~self.is_walkable(pts[:, 0], pts[:, 1])
        np.clip(pts[:, 1], self.bounds.y_min, self.bounds.y_max, out=pts[:, 1])
        for obs in self.obstacles:
            inside = obs.contains(pts[:, 0], pts[:, 1], strict=True)
            if not inside.any():
                continue
            ix = np.flatnonzero(inside)
            px, py = pts[ix, 0], pts[ix, 1]
            # distance to each edge from inside; push along the smallest
            gaps = np.stack([px - obs.x_min, obs.x_max - px, py - obs.y_min, obs.y_max - py])
            edge = np.argmin(gaps, axis=0)
            px = np.where(edge == 0, obs.x_min, np.where(edge == 1, obs.x_max, px))
            py = np.where(edge == 2, obs.y_min, np.where(edge == 3, obs.y_max, py))
            pts[ix, 0], pts[ix, 1] = px, py
        return pts, moved


def _rect_distance_normal(x: np.ndarray, y: np.ndarray, obs: Rect) -> tuple[np.ndarray, np.ndarray]:
    """Distance from exterior points to a rectangle and the unit normal
    pointing into it.  On-edge points fall back to the nearest-edge rule
    with fixed order (left, right, bottom, top); interior points get the
    same rule so callers can detect/repair them."""
    qx = np.clip(x, obs.x_min, obs.x_max)
    qy = np.clip(y, obs.y_min, obs.y_max)
    ex, ey = qx - x, qy - y
    dist = np.hypot(ex, ey)
    normal = np.zeros((x.shape[0], 2))
    pos = dist > 0.0
    normal[pos, 0] = ex[pos] / dist[pos]
    normal[pos, 1] = ey[pos] / dist[pos]
    if not pos.all():
        onb = np.flatnonzero(~pos)
        gaps = np.stack(
            [np.abs(x[onb] - obs.x_min), np.abs(x[onb] - obs.x_max),
             np.abs(y[onb] - obs.y_min), np.abs(y[onb] - obs.y_max)]
        )
        edge = np.argmin(gaps, axis=0)
        edge_normals = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        normal[onb] = edge_normals[edge]
    return dist, normal


@dataclass(frozen=True)
class ReflectionParams:
    """Comfort-zone width for the wall redirection blend."""

    epsilon: float = 0.1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")


def smoothstep(s):
    """C^1 ramp: 0 below 0, 3 s^2 - 2 s^3 on [0, 1], 1 above 1."""
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def distance_to_boundary(domain: WalkableDomain, point) -> float:
    """Euclidean distance from a walkable point to the nearest wall or
    obstacle edge."""
    pt = np.asarray(point, dtype=float)
    if not domain.is_walkable(pt[0], pt[1]):
        raise DomainError(f"point {point} is outside the walkable set")
    dist, _ = domain.distance_and_normal(pt[None, :])
    return float(dist[0])


def outward_normal(domain: WalkableDomain, point) -> np.ndarray:
    """Unit normal of the nearest boundary element, pointing out of the
    walkable region."""
    pt = np.asarray(point, dtype=float)
    if not domain.is_walkable(pt[0], pt[1]):
        raise DomainError(f"point {point} is outside the walkable set")
    _, normal = domain.distance_and_normal(pt[None, :])
    return normal[0]


def tangent_of_normal(normal) -> np.ndarray:
    """Rotate a normal by +90 degrees: (n1, n2) -> (-n2, n1)."""
    n = np.asarray(normal, dtype=float)
    return np.stack([-n[..., 1], n[..., 0]], axis=-1)


def redirect_velocities(
    dist: np.ndarray,
    normal: np.ndarray,
    velocities: np.ndarray,
    epsilon: float,
) -> np.ndarray:
    """Boundary redirection against precomputed wall distances/normals.

    Velocities pointing into the domain (v . n < 0) pass through
    unchanged.  Outward ones rotate onto the wall tangent, blend back
    toward v with the smooth ramp of distance/epsilon, and are rescaled
    to the original speed.  Zero velocities stay zero.
    """
    vel = np.atleast_2d(np.asarray(velocities, dtype=float))
    speed = np.hypot(vel[:, 0], vel[:, 1])
    v_dot_n = np.einsum("ij,ij->i", vel, normal)
    active = (v_dot_n >= 0.0) & (speed > 0.0)
    if not active.any():
        return vel.copy()

    out = vel.copy()
    tang = tangent_of_normal(normal[active])
    v_act = vel[active]
    sp = speed[active]
    v_dot_t = np.einsum("ij,ij->i", v_act, tang)
    sign = np.where(v_dot_t >= 0.0, 1.0, -1.0)
    v_tang = (sp * sign)[:, None] * tang
    blend = smoothstep(dist[active] / epsilon)[:, None]
    v_star = v_tang + blend * (v_act - v_tang)
    # v_star = 0 only when v = 0, which is excluded by `active`
    v_star_norm = np.hypot(v_star[:, 0], v_star[:, 1])
    out[active] = v_star * (sp / v_star_norm)[:, None]
    return out


def reflect_velocities(
    domain: WalkableDomain,
    params: ReflectionParams,
    points: np.ndarray,
    velocities: np.ndarray,
) -> np.ndarray:
    """Apply the boundary redirection to rows of (points, velocities)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dist, normal = domain.distance_and_normal(pts)
    return redirect_velocities(dist, normal, velocities, params.epsilon)


def reflect_velocity(
    domain: WalkableDomain,
    params: ReflectionParams,
    point,
    velocity,
) -> np.ndarray:
    """Single-point form of :func:`reflect_velocities`."""
    pt = np.asarray(point, dtype=float)
    if not domain.is_walkable(pt[0], pt[1]):
        raise DomainError(f"point {point} is outside the walkable set")
    return reflect_velocities(domain, params, pt[None, :], np.asarray(velocity, dtype=float)[None, :])[0]
