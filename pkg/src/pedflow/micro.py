"""Stochastic stop-and-go agent simulation.

Each agent carries a position, a velocity and a binary status (1 =
walking, 0 = stopped).  One synchronous Euler step, all terms read from
the state at the beginning of the step:

    x'  = x + r dt V(x, v)          (stopped agents do not move)
    v'  = v + dt F(x, v)  if r = 1, else 0
    r'  = 1 - r with probability dt lambda(r, x), else r

The flip probability needs dt <= 1 / sup(lambda) to be a probability.
Stopped agents keep exactly zero velocity, so status and velocity stay
consistent under any number of steps.

``run_ensemble`` executes many independent replicates, each on its own
counter-based random stream derived from (master seed, replicate
index), and accumulates per-cell occupation counts into an empirical
density.  All accumulators are integers, so results are bit-identical
for any worker count.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .forces import destination_direction, micro_forces, pairwise_interaction
from .geometry import reflect_velocities
from .grid import Grid
from .scenario import Scenario

__all__ = [
    "MicroState",
    "MicroModel",
    "ReplicateResult",
    "EnsembleResult",
    "sample_initial",
    "step",
    "run_replicate",
    "run_ensemble",
    "empirical_density",
    "replicate_rng",
]


@dataclass
class MicroState:
    """Positions (N,2), velocities (N,2), statuses (N,) at one step."""

    positions: np.ndarray
    velocities: np.ndarray
    statuses: np.ndarray
    step_index: int = 0
    time: float = 0.0

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def stopped_fraction(self) -> float:
        return float(np.mean(self.statuses == 0))


def replicate_rng(master_seed: int, replicate_index: int) -> np.random.Generator:
    """Counter-based stream for one replicate; independent of how many
    replicates run or in which order."""
    seq = np.random.SeedSequence([np.uint64(master_seed), np.uint64(replicate_index)])
    return np.random.Generator(np.random.Philox(seq))


class MicroModel:
    """Stepping context bound to one scenario.

    Holds the walkable domain, force and rate parameters and the time
    step; counts containment projections (Euler overshoots pushed back
    to the nearest walkable point) in ``projection_events``.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.domain = scenario.domain
        self.reflection = scenario.reflection
        self.forces = scenario.forces
        self.rates = scenario.rates
        self.dt = scenario.micro.dt
        if self.dt * self.rates.sup_bound > 1.0 + 1e-12:
            raise ValueError(
                f"dt * sup(lambda) = {self.dt * self.rates.sup_bound:.6g} > 1; "
                "flip probabilities would exceed one"
            )
        self.projection_events = 0

    def sample_initial(self, rng: np.random.Generator) -> MicroState:
        """Draw the initial state: uniform positions on the starting
        rectangle, Bernoulli statuses (P(stopped) = p_stop), velocities
        from the macroscopic closure so both tiers start comparably:

            v_i = r_i tau/(1 + tau lambda_walk(x_i))
                  ((vC/tau) D(x_i) + (1/N) sum_j G(x_i - x_j))
        """
        sc = self.scenario
        rect = sc.initial.rect
        n = sc.micro.n_pedestrians
        xy = rng.random((n, 2))
        xy[:, 0] = rect.x_min + xy[:, 0] * rect.width
        xy[:, 1] = rect.y_min + xy[:, 1] * rect.height
        statuses = np.where(rng.random(n) < sc.initial.p_stop, 0, 1).astype(np.int64)

        fp = self.forces
        drive = (fp.comfort_speed / fp.relaxation_time) * destination_direction(fp, xy)
        # closure formula weights pairs by 1/N (self term is zero)
        inter = pairwise_interaction(fp, xy) * ((n - 1) / n if n > 1 else 0.0)
        lam_walk = self.rates.walking(xy[:, 0], xy[:, 1])
        tau = fp.relaxation_time
        scale = statuses * tau / (1.0 + tau * np.asarray(lam_walk))
        velocities = scale[:, None] * (drive + inter)
        return MicroState(xy, velocities, statuses)

    def step(self, state: MicroState, rng: np.random.Generator) -> MicroState:
        """One synchronous Euler step; every term reads the old state."""
        x, v, r = state.positions, state.velocities, state.statuses
        walk = r[:, None].astype(float)

        redirected = reflect_velocities(self.domain, self.reflection, x, v)
        x_new = x + (self.dt * walk) * redirected
        x_new, moved = self.domain.project_inside(x_new)
        self.projection_events += int(moved.sum())

        force = micro_forces(self.forces, x, v)
        v_new = walk * (v + self.dt * force)

        lam = np.asarray(self.rates(r, x[:, 0], x[:, 1]))
        flip = rng.random(state.n) <= self.dt * lam
        r_new = np.where(flip, 1 - r, r)
        # freshly stopped agents never read their velocity again before it
        # is zeroed, so store the canonical zero immediately
        v_new *= r_new[:, None]

        n_step = state.step_index + 1
        return MicroState(x_new, v_new, r_new, n_step, n_step * self.dt)


def sample_initial(scenario: Scenario, replicate_seed: int) -> MicroState:
    """Initial state for one replicate (op-level convenience)."""
    model = MicroModel(scenario)
    return model.sample_initial(replicate_rng(scenario.seed, replicate_seed))


def step(state: MicroState, scenario: Scenario, rng: np.random.Generator) -> MicroState:
    """Advance one step under the scenario's parameters."""
    return MicroModel(scenario).step(state, rng)


@dataclass
class ReplicateResult:
    """Integer accumulators from one replicate."""

    counts: np.ndarray  # (n_snapshots, nx, ny) in-window occupation counts
    inside: np.ndarray  # (n_snapshots,) number of agents inside the window
    stopped: np.ndarray  # (n_snapshots,) number of stopped agents
    behind_cut: np.ndarray  # (n_snapshots, n_cuts) agents with x <= cut
    crossing_times: np.ndarray  # (n_cuts,) first time all agents passed, NaN if never
    projections: int


@dataclass
class EnsembleResult:
    """Monte-Carlo ensemble summary.

    ``density`` holds the empirical per-cell density, averaged over
    replicates, at each snapshot time; ``mass_in_window`` the matching
    in-window mass fraction.  ``mass_balance`` is the replicate-averaged
    fraction of agents at or left of each cut, computed from exact
    positions (window-independent).
    """

    grid: Grid
    snapshot_times: tuple[float, ...]
    cuts: tuple[float, ...]
    density: np.ndarray  # (n_snapshots, nx, ny)
    mass_in_window: np.ndarray  # (n_snapshots,)
    stopped_fraction: np.ndarray  # (n_replicates, n_snapshots)
    mass_balance: np.ndarray  # (n_snapshots, n_cuts)
    crossing_times: np.ndarray  # (n_replicates, n_cuts)
    projection_events: int = 0


def run_replicate(scenario: Scenario, replicate_index: int) -> ReplicateResult:
    """Simulate one replicate to the horizon, recording snapshots."""
    model = MicroModel(scenario)
    rng = replicate_rng(scenario.seed, replicate_index)
    grid = scenario.make_grid()
    snap_steps = scenario.snapshot_steps()
    cuts = scenario.cuts
    n_steps = max(snap_steps) if snap_steps else round(scenario.horizon / model.dt)

    n_snap = len(snap_steps)
    counts = np.zeros((n_snap, grid.nx, grid.ny), dtype=np.int64)
    inside = np.zeros(n_snap, dtype=np.int64)
    stopped = np.zeros(n_snap, dtype=np.int64)
    behind = np.zeros((n_snap, len(cuts)), dtype=np.int64)
    crossing = np.full(len(cuts), np.nan)

    snap_lookup = {s: k for k, s in enumerate(snap_steps)}
    state = model.sample_initial(rng)
    for n in range(n_steps + 1):
        x1 = state.positions[:, 0]
        if n in snap_lookup:
            k = snap_lookup[n]
            counts[k], inside[k] = grid.histogram(state.positions)
            stopped[k] = int(np.sum(state.statuses == 0))
            for c, cut in enumerate(cuts):
                behind[k, c] = int(np.sum(x1 <= cut))
        for c, cut in enumerate(cuts):
            if np.isnan(crossing[c]) and np.all(x1 > cut):
                crossing[c] = n * model.dt
        if n < n_steps:
            state = model.step(state, rng)
    return ReplicateResult(counts, inside, stopped, behind, crossing, model.projection_events)


def _run_replicate_star(args) -> ReplicateResult:
    return run_replicate(*args)


def run_ensemble(scenario: Scenario, workers: int = 1) -> EnsembleResult:
    """Run all replicates and reduce them into an EnsembleResult.

    Replicate streams are fixed by (seed, index), and reduction sums
    integer counts, so the result is identical for any ``workers``.
    """
    m = scenario.micro.n_replicates
    n = scenario.micro.n_pedestrians
    grid = scenario.make_grid()

    jobs = [(scenario, k) for k in range(m)]
    if workers <= 1:
        results = map(_run_replicate_star, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_run_replicate_star, jobs, chunksize=max(1, m // (workers * 4)))

    n_snap = len(scenario.snapshot_times)
    counts = np.zeros((n_snap, grid.nx, grid.ny), dtype=np.int64)
    inside = np.zeros(n_snap, dtype=np.int64)
    behind = np.zeros((n_snap, len(scenario.cuts)), dtype=np.int64)
    stopped_fraction = np.zeros((m, n_snap))
    crossing = np.zeros((m, len(scenario.cuts)))
    projections = 0
    for k, res in enumerate(results):
        counts += res.counts
        inside += res.inside
        behind += res.behind_cut
        stopped_fraction[k] = res.stopped / n
        crossing[k] = res.crossing_times
        projections += res.projections
    if workers > 1:
        pool.shutdown()

    total = n * m
    density = counts / (total * grid.cell_area)
    return EnsembleResult(
        grid=grid,
        snapshot_times=scenario.snapshot_times,
        cuts=scenario.cuts,
        density=density,
        mass_in_window=inside / total,
        stopped_fraction=stopped_fraction,
        mass_balance=behind / total,
        crossing_times=crossing,
        projection_events=projections,
    )


def empirical_density(position_sets, grid: Grid) -> np.ndarray:
    """Average per-cell density over replicate position arrays.

    Each array contributes (1/N_m) of its in-window indicator counts;
    the average over replicates is divided by the cell area.  Out-of-
    window points simply drop out (they still count in each N_m).
    """
    sets = list(position_sets)
    if sets and np.asarray(sets[0]).ndim == 1:  # a single (n, 2) array
        sets = [np.asarray(position_sets)]
    acc = np.zeros((grid.nx, grid.ny))
    for pos in sets:
        pos = np.asarray(pos, dtype=float)
        counts, _ = grid.histogram(pos)
        acc += counts / pos.shape[0]
    return acc / (len(sets) * grid.cell_area)
