"""Scenario definition, JSON (de)serialization, validation and presets.

A scenario bundles everything one experiment needs: corridor geometry,
force and switching-rate parameters, the initial law, discretization
settings for both tiers, horizon, snapshot times, cut positions and the
master seed.  Loading validates every invariant eagerly with a message
naming the violated bound.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .forces import ForceParams, MorseKernel
from .geometry import Rect, ReflectionParams, WalkableDomain
from .grid import Grid
from .rates import BandRegion, DiscRegion, RateMap, RatePair

__all__ = [
    "ScenarioError",
    "InitialConfig",
    "MicroConfig",
    "MacroConfig",
    "Scenario",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "load_preset",
    "preset_names",
    "resolve_scenario",
    "with_overrides",
]

DEFAULT_DT_CAP = 0.01


class ScenarioError(ValueError):
    """Invalid or inconsistent scenario configuration."""


@dataclass(frozen=True)
class InitialConfig:
    """Uniform initial law on a rectangle with stop probability p_stop."""

    rect: Rect
    p_stop: float


@dataclass(frozen=True)
class MicroConfig:
    n_pedestrians: int
    n_replicates: int
    dt: float


@dataclass(frozen=True)
class MacroConfig:
    dx: float
    dy: float
    cfl: float = 0.45


@dataclass(frozen=True)
class Scenario:
    name: str
    domain: WalkableDomain
    reflection: ReflectionParams
    forces: ForceParams
    rates: RatePair
    initial: InitialConfig
    micro: MicroConfig
    macro: MacroConfig
    horizon: float
    snapshot_times: tuple[float, ...]
    cuts: tuple[float, ...]
    seed: int
    out_dir: str | None = None

    # -- derived helpers -------------------------------------------------------

    def make_grid(self) -> Grid:
        try:
            return Grid.from_domain(self.domain, self.macro.dx, self.macro.dy)
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc

    def snapshot_steps(self) -> tuple[int, ...]:
        """Snapshot times as micro step indices (validated aligned)."""
        return tuple(round(t / self.micro.dt) for t in self.snapshot_times)

    def validate(self) -> "Scenario":
        mic, mac = self.micro, self.macro
        if not self.snapshot_times:
            raise ScenarioError("snapshot_times must not be empty")
        if mic.n_pedestrians < 1 or mic.n_replicates < 1:
            raise ScenarioError("n_pedestrians and n_replicates must be >= 1")
        if mic.dt <= 0:
            raise ScenarioError("micro dt must be positive")
        sup = self.rates.sup_bound
        if mic.dt * sup > 1.0 + 1e-12:
            raise ScenarioError(
                f"micro dt violates dt <= 1/sup(lambda): dt * sup = "
                f"{mic.dt * sup:.6g} > 1 (sup = {sup:.6g})"
            )
        if not (0.0 <= self.initial.p_stop <= 1.0):
            raise ScenarioError("p_stop must lie in [0, 1]")
        if mac.dx <= 0 or mac.dy <= 0:
            raise ScenarioError("macro cell sizes must be positive")
        if not (0.0 < mac.cfl <= 1.0):
            raise ScenarioError("cfl must lie in (0, 1]")
        if self.horizon <= 0:
            raise ScenarioError("horizon must be positive")
        for t in self.snapshot_times:
            if not (0.0 <= t <= self.horizon + 1e-12):
                raise ScenarioError(f"snapshot time {t} outside [0, horizon]")
            n = round(t / mic.dt)
            if abs(n * mic.dt - t) > 1e-9:
                raise ScenarioError(
                    f"snapshot time {t} is not a multiple of micro dt {mic.dt}"
                )
        if list(self.snapshot_times) != sorted(set(self.snapshot_times)):
            raise ScenarioError("snapshot_times must be strictly increasing")
        if self.seed < 0:
            raise ScenarioError("seed must be a nonnegative integer")

        rect = self.initial.rect
        b = self.domain.bounds
        if not (rect.y_min >= b.y_min - 1e-12 and rect.y_max <= b.y_max + 1e-12):
            raise ScenarioError("initial rectangle extends outside the strip")
        for k, obs in enumerate(self.domain.obstacles):
            if (rect.x_min < obs.x_max and obs.x_min < rect.x_max
                    and rect.y_min < obs.y_max and obs.y_min < rect.y_max):
                raise ScenarioError(f"initial rectangle overlaps obstacle {k}")
        self.make_grid()
        return self


# -- JSON mapping ---------------------------------------------------------------


def _rect_from(obj, what: str) -> Rect:
    try:
        return Rect(float(obj["x_min"]), float(obj["x_max"]),
                    float(obj["y_min"]), float(obj["y_max"]))
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"bad rectangle in {what}: {obj!r}") from exc


def _rect_to(rect: Rect) -> dict:
    return {"x_min": rect.x_min, "x_max": rect.x_max,
            "y_min": rect.y_min, "y_max": rect.y_max}


def _rate_map_from(obj, what: str) -> RateMap:
    regions = []
    for raw in obj.get("regions", []):
        shape = raw.get("shape")
        if shape == "disc":
            regions.append(DiscRegion(tuple(float(c) for c in raw["center"]),
                                      float(raw["radius"]), float(raw["value"])))
        elif shape == "band":
            regions.append(BandRegion(float(raw["x_min"]), float(raw["x_max"]),
                                      float(raw["value"])))
        else:
            raise ScenarioError(f"unknown rate region shape {shape!r} in {what}")
    try:
        return RateMap(float(obj["default"]), tuple(regions))
    except (KeyError, ValueError) as exc:
        raise ScenarioError(f"bad rate map in {what}: {exc}") from exc


def _rate_map_to(rate_map: RateMap) -> dict:
    regions = []
    for region in rate_map.regions:
        if isinstance(region, DiscRegion):
            regions.append({"shape": "disc", "center": list(region.center),
                            "radius": region.radius, "value": region.value})
        elif isinstance(region, BandRegion):
            regions.append({"shape": "band", "x_min": region.x_min,
                            "x_max": region.x_max, "value": region.value})
        else:  # pragma: no cover - closed region set
            raise ScenarioError(f"unserializable region {region!r}")
    return {"default": rate_map.default, "regions": regions}


def scenario_from_dict(data: dict) -> Scenario:
    """Build and validate a Scenario from a plain dict."""
    try:
        dom = data["domain"]
        domain = WalkableDomain(
            bounds=_rect_from(dom, "domain"),
            obstacles=tuple(_rect_from(o, "obstacles") for o in dom.get("obstacles", [])),
            closed=bool(dom.get("closed", False)),
        )
        refl = ReflectionParams(float(data.get("reflection", {}).get("epsilon", 0.1)))
        fo = data["forces"]
        kernel_raw = fo.get("kernel", {})
        kernel = MorseKernel(
            amplitude=float(kernel_raw.get("amplitude", 2.0)),
            attraction_range=float(kernel_raw.get("attraction_range", 1.0)),
            repulsion_range=float(kernel_raw.get("repulsion_range", 0.5)),
            offset=float(kernel_raw.get("offset", 0.9)),
        )
        trunc = fo.get("truncation_radius")
        forces = ForceParams(
            comfort_speed=float(fo["comfort_speed"]),
            relaxation_time=float(fo["relaxation_time"]),
            destination=tuple(float(c) for c in fo["destination"]),
            kernel=kernel,
            truncation_radius=None if trunc is None else float(trunc),
        )
        rates = RatePair(
            stopped=_rate_map_from(data["rates"]["stopped"], "rates.stopped"),
            walking=_rate_map_from(data["rates"]["walking"], "rates.walking"),
        )
        init = InitialConfig(
            rect=_rect_from(data["initial"]["rect"], "initial.rect"),
            p_stop=float(data["initial"]["p_stop"]),
        )
        mic_raw = data["micro"]
        dt = mic_raw.get("dt")
        if dt is None:
            sup = rates.sup_bound
            dt = DEFAULT_DT_CAP if sup == 0 else min(DEFAULT_DT_CAP, 0.5 / sup)
        micro = MicroConfig(
            n_pedestrians=int(mic_raw["n_pedestrians"]),
            n_replicates=int(mic_raw["n_replicates"]),
            dt=float(dt),
        )
        mac_raw = data["macro"]
        macro = MacroConfig(
            dx=float(mac_raw["dx"]),
            dy=float(mac_raw["dy"]),
            cfl=float(mac_raw.get("cfl", 0.45)),
        )
        scenario = Scenario(
            name=str(data["name"]),
            domain=domain,
            reflection=refl,
            forces=forces,
            rates=rates,
            initial=init,
            micro=micro,
            macro=macro,
            horizon=float(data["horizon"]),
            snapshot_times=tuple(float(t) for t in data["snapshot_times"]),
            cuts=tuple(float(c) for c in data.get("cuts", [])),
            seed=int(data["seed"]),
            out_dir=data.get("out_dir"),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc
    return scenario.validate()


def scenario_to_dict(scenario: Scenario) -> dict:
    s = scenario
    return {
        "name": s.name,
        "domain": {
            **_rect_to(s.domain.bounds),
            "obstacles": [_rect_to(o) for o in s.domain.obstacles],
            "closed": s.domain.closed,
        },
        "reflection": {"epsilon": s.reflection.epsilon},
        "forces": {
            "comfort_speed": s.forces.comfort_speed,
            "relaxation_time": s.forces.relaxation_time,
            "destination": list(s.forces.destination),
            "kernel": {
                "amplitude": s.forces.kernel.amplitude,
                "attraction_range": s.forces.kernel.attraction_range,
                "repulsion_range": s.forces.kernel.repulsion_range,
                "offset": s.forces.kernel.offset,
            },
            "truncation_radius": s.forces.truncation_radius,
        },
        "rates": {
            "stopped": _rate_map_to(s.rates.stopped),
            "walking": _rate_map_to(s.rates.walking),
        },
        "initial": {"rect": _rect_to(s.initial.rect), "p_stop": s.initial.p_stop},
        "micro": {
            "n_pedestrians": s.micro.n_pedestrians,
            "n_replicates": s.micro.n_replicates,
            "dt": s.micro.dt,
        },
        "macro": {"dx": s.macro.dx, "dy": s.macro.dy, "cfl": s.macro.cfl},
        "horizon": s.horizon,
        "snapshot_times": list(s.snapshot_times),
        "cuts": list(s.cuts),
        "seed": s.seed,
        "out_dir": s.out_dir,
    }


def load_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(data)


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def preset_names() -> list[str]:
    files = resources.files("pedflow.presets")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> Scenario:
    """Load a bundled scenario by name (see :func:`preset_names`)."""
    ref = resources.files("pedflow.presets").joinpath(f"{name}.json")
    if not ref.is_file():
        raise ScenarioError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    return scenario_from_dict(json.loads(ref.read_text()))


def resolve_scenario(spec: str) -> Scenario:
    """Interpret a CLI scenario argument: a file path if it exists on
    disk, otherwise a bundled preset name."""
    if Path(spec).exists():
        return load_scenario(spec)
    return load_preset(spec)


def with_overrides(scenario: Scenario, *, seed: int | None = None,
                   snapshot_times=None, out_dir: str | None = None) -> Scenario:
    """Copy a scenario with CLI-level overrides applied and re-validated."""
    s = scenario
    if seed is not None:
        s = replace(s, seed=seed)
    if snapshot_times is not None:
        s = replace(s, snapshot_times=tuple(float(t) for t in snapshot_times))
    if out_dir is not None:
        s = replace(s, out_dir=out_dir)
    return s.validate()
