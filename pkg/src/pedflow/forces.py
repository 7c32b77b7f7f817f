"""Driving and interaction forces.

Every agent relaxes toward its comfort speed along the unit direction to
a fixed destination point, and feels the averaged pairwise kernel force

    G(d) = -C (exp(-(|d| - r0)/l_a) - exp(-(|d| - r0)/l_r)) d/|d|,

the gradient field of a Morse potential: repulsive below the offset r0,
zero at r0, attractive beyond it.  The same kernel convolved against a
density field gives the mean force entering the macroscopic closure; on
a uniform grid the convolution is a rectangular-rule sum over cell
centers, evaluated either directly (arbitrary points) or via FFT (all
cell centers at once; identical sum, up to rounding).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as _fft

__all__ = [
    "MorseKernel",
    "ForceParams",
    "destination_direction",
    "interaction_kernel",
    "pairwise_interaction",
    "micro_force",
    "micro_forces",
    "macro_mean_force",
    "KernelConvolution",
]

ARRIVAL_RADIUS = 1e-9
SELF_EXCLUSION_RADIUS = 1e-9


@dataclass(frozen=True)
class MorseKernel:
    """Parameters of the pairwise kernel G."""

    amplitude: float = 2.0
    attraction_range: float = 1.0
    repulsion_range: float = 0.5
    offset: float = 0.9

    def __post_init__(self):
        if self.amplitude < 0 or self.attraction_range <= 0 or self.repulsion_range <= 0:
            raise ValueError("kernel amplitude must be >= 0 and ranges > 0")

    def profile(self, s):
        """Signed radial magnitude g(s); force vector is g(s) d/s."""
        s = np.asarray(s, dtype=float)
        return -self.amplitude * (
            np.exp(-(s - self.offset) / self.attraction_range)
            - np.exp(-(s - self.offset) / self.repulsion_range)
        )

    def cutoff_radius(self, tol: float = 1e-8) -> float:
        """Distance beyond which |g| stays below tol (slow exponential
        dominates there)."""
        if self.amplitude == 0.0:
            return 0.0
        la = max(self.attraction_range, self.repulsion_range)
        return self.offset + la * np.log(self.amplitude / tol)


@dataclass(frozen=True)
class ForceParams:
    """Comfort speed, relaxation time, destination point and kernel."""

    comfort_speed: float
    relaxation_time: float
    destination: tuple[float, float]
    kernel: MorseKernel = field(default_factory=MorseKernel)
    truncation_radius: float | None = None

    def __post_init__(self):
        if not (self.comfort_speed >= 0 and self.relaxation_time > 0):
            raise ValueError("comfort_speed must be >= 0 and relaxation_time > 0")

    @property
    def conv_radius(self) -> float:
        """Convolution truncation radius (explicit or kernel cutoff)."""
        if self.truncation_radius is not None:
            return self.truncation_radius
        return self.kernel.cutoff_radius()


def destination_direction(params: ForceParams, points: np.ndarray) -> np.ndarray:
    """Unit vector(s) from points toward the destination; zero for
    points already within the arrival radius."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    delta = np.asarray(params.destination, dtype=float) - pts
    dist = np.hypot(delta[:, 0], delta[:, 1])
    out = np.zeros_like(delta)
    far = dist >= ARRIVAL_RADIUS
    out[far] = delta[far] / dist[far, None]
    if np.asarray(points).ndim == 1:
        return out[0]
    return out


def interaction_kernel(params: ForceParams, displacement) -> np.ndarray:
    """Kernel force for displacement d = x_i - x_j; zero at d = 0."""
    d = np.asarray(displacement, dtype=float)
    s = float(np.hypot(d[0], d[1]))
    if s < SELF_EXCLUSION_RADIUS:
        return np.zeros(2)
    return params.kernel.profile(s) * d / s


def pairwise_interaction(params: ForceParams, positions: np.ndarray) -> np.ndarray:
    """Averaged pair force on every agent: (1/(N-1)) sum_{j != i} G(x_i - x_j).

    Returns zeros for N = 1 or a zero-amplitude kernel.  Coincident
    pairs contribute nothing.
    """
    x = np.asarray(positions, dtype=float)
    n = x.shape[0]
    if n <= 1 or params.kernel.amplitude == 0.0:
        return np.zeros_like(x)
    diff = x[:, None, :] - x[None, :, :]
    s = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(s, np.inf)  # exclude self
    s = np.where(s < SELF_EXCLUSION_RADIUS, np.inf, s)
    weight = params.kernel.profile(s) / s
    weight[~np.isfinite(weight)] = 0.0
    return np.einsum("ij,ijk->ik", weight, diff) / (n - 1)


def micro_forces(params: ForceParams, positions: np.ndarray, velocities: np.ndarray) -> np.ndarray:
    """Total force on every agent: destination relaxation plus the
    averaged pair interaction."""
    x = np.asarray(positions, dtype=float)
    v = np.asarray(velocities, dtype=float)
    drive = (params.comfort_speed * destination_direction(params, x) - v) / params.relaxation_time
    return drive + pairwise_interaction(params, x)


def micro_force(params: ForceParams, i: int, positions: np.ndarray, velocities: np.ndarray) -> np.ndarray:
    """Total force on agent i (convenience wrapper)."""
    return micro_forces(params, positions, velocities)[i]


def macro_mean_force(
    params: ForceParams,
    point,
    cell_centers: np.ndarray,
    density: np.ndarray,
    cell_area: float,
) -> np.ndarray:
    """Mean force at one point against a gridded density.

    Direct rectangular-rule sum over cell centers: (vC/tau) D(x) plus
    sum_cells G(x - y_c) u_c dx dy, skipping cells closer than the
    self-exclusion radius or farther than the truncation radius.
    ``cell_centers`` has shape (m, 2) and ``density`` shape (m,).
    """
    pt = np.asarray(point, dtype=float)
    centers = np.asarray(cell_centers, dtype=float)
    u = np.asarray(density, dtype=float)
    if centers.shape[0] != u.shape[0]:
        raise ValueError("cell_centers and density length mismatch")
    drive = (params.comfort_speed / params.relaxation_time) * destination_direction(params, pt)
    if params.kernel.amplitude == 0.0:
        return drive
    diff = pt[None, :] - centers
    s = np.hypot(diff[:, 0], diff[:, 1])
    keep = (s >= SELF_EXCLUSION_RADIUS) & (s <= params.conv_radius)
    if not keep.any():
        return drive
    w = params.kernel.profile(s[keep]) / s[keep] * u[keep]
    return drive + cell_area * (w[:, None] * diff[keep]).sum(axis=0)


class KernelConvolution:
    """FFT evaluation of the rectangular-rule kernel sum on a uniform grid.

    Precomputes the kernel sampled at all cell-center offsets (zero at
    the origin and beyond the truncation radius) and its transform;
    ``apply`` then returns, for every cell center x_ij,

        sum_kl G(x_ij - x_kl) u_kl dx dy,

    the same truncated sum as :func:`macro_mean_force` evaluates
    directly.
    """

    def __init__(self, params: ForceParams, nx: int, ny: int, dx: float, dy: float):
        self.cell_area = dx * dy
        self.nx, self.ny = nx, ny
        off_x = np.arange(-(nx - 1), nx) * dx
        off_y = np.arange(-(ny - 1), ny) * dy
        ox, oy = np.meshgrid(off_x, off_y, indexing="ij")
        s = np.hypot(ox, oy)
        with np.errstate(invalid="ignore", divide="ignore"):
            w = params.kernel.profile(s) / s
        w[(s < SELF_EXCLUSION_RADIUS) | (s > params.conv_radius)] = 0.0
        kx = w * ox
        ky = w * oy
        self._shape = (
            _fft.next_fast_len(nx + 2 * nx - 2),
            _fft.next_fast_len(ny + 2 * ny - 2),
        )
        self._kx_hat = _fft.rfft2(kx, s=self._shape)
        self._ky_hat = _fft.rfft2(ky, s=self._shape)

    def apply(self, density: np.ndarray) -> np.ndarray:
        """Convolve a (nx, ny) density; returns (nx, ny, 2)."""
        u_hat = _fft.rfft2(density, s=self._shape)
        sl = (slice(self.nx - 1, 2 * self.nx - 1), slice(self.ny - 1, 2 * self.ny - 1))
        cx = _fft.irfft2(u_hat * self._kx_hat, s=self._shape)[sl]
        cy = _fft.irfft2(u_hat * self._ky_hat, s=self._shape)[sl]
        return np.stack([cx, cy], axis=-1) * self.cell_area
