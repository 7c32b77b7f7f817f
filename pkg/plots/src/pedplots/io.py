"""Schema-validated readers for pedflow run directories.

Every reader checks headers and cell contents against the documented
CSV schemas and reports violations with the offending file and line
number. Readers never modify the run directory.
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "SchemaError",
    "DensityField",
    "RunGeometry",
    "read_density",
    "read_table",
    "discover_snapshots",
    "read_geometry",
]

SNAPSHOT_PATTERN = re.compile(r"^(micro|macro)_t(-?[0-9.]+(?:e-?[0-9]+)?)\.csv$")

DENSITY_HEADERS = {
    "micro": ["i", "j", "x_center", "y_center", "u_mic"],
    "macro": ["i", "j", "x_center", "y_center", "u0", "u1"],
}


class SchemaError(Exception):
    """A file does not match the documented run-directory schema."""

    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


@dataclass
class DensityField:
    """One density snapshot on its cell grid."""

    tier: str
    time: float
    values: np.ndarray  # (nx, ny) total density
    extent: tuple[float, float, float, float]  # x_min, x_max, y_min, y_max


@dataclass
class RunGeometry:
    window: tuple[float, float, float, float]
    obstacles: list[tuple[float, float, float, float]]


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(path, None, "file not found")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(path, 1, "empty file") from None
        rows = list(reader)
    return header, rows


def _parse_float(token: str, path, line: int, column: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise SchemaError(path, line, f"column {column!r}: not a number: {token!r}") from None


def read_density(path, tier: str) -> DensityField:
    """Read one `<tier>_t<time>.csv` snapshot into a grid."""
    expected = DENSITY_HEADERS[tier]
    header, rows = _read_rows(path)
    if header != expected:
        raise SchemaError(path, 1, f"expected header {expected}, found {header}")
    if not rows:
        raise SchemaError(path, 2, "no data rows")

    n = len(rows)
    ii = np.empty(n, dtype=np.int64)
    jj = np.empty(n, dtype=np.int64)
    xc = np.empty(n)
    yc = np.empty(n)
    val = np.empty(n)
    for k, row in enumerate(rows):
        line = k + 2
        if len(row) != len(expected):
            raise SchemaError(path, line, f"expected {len(expected)} fields, found {len(row)}")
        try:
            ii[k] = int(row[0])
            jj[k] = int(row[1])
        except ValueError:
            raise SchemaError(path, line, f"bad cell index: {row[:2]!r}") from None
        xc[k] = _parse_float(row[2], path, line, "x_center")
        yc[k] = _parse_float(row[3], path, line, "y_center")
        if tier == "micro":
            val[k] = _parse_float(row[4], path, line, "u_mic")
        else:
            val[k] = (_parse_float(row[4], path, line, "u0")
                      + _parse_float(row[5], path, line, "u1"))

    nx, ny = int(ii.max()) + 1, int(jj.max()) + 1
    if n != nx * ny or ii.min() < 0 or jj.min() < 0:
        raise SchemaError(path, None, f"cell indices do not fill a {nx} x {ny} grid")
    values = np.zeros((nx, ny))
    values[ii, jj] = val

    xs = np.unique(xc)
    ys = np.unique(yc)
    dx = xs[1] - xs[0] if xs.size > 1 else 1.0
    dy = ys[1] - ys[0] if ys.size > 1 else 1.0
    extent = (float(xs.min() - dx / 2), float(xs.max() + dx / 2),
              float(ys.min() - dy / 2), float(ys.max() + dy / 2))
    time = snapshot_time_from_name(Path(path).name)
    return DensityField(tier, time, values, extent)


def read_table(path, leading: list[str], prefix_groups: list[str] = (),
               string_columns: set[str] = frozenset({"tier"})) -> dict[str, np.ndarray]:
    """Read a CSV whose header starts with ``leading`` followed by any
    number of columns named with one of the ``prefix_groups`` prefixes.

    Columns outside ``string_columns`` must parse as numbers (empty
    cells become NaN); violations name the file, line and column.
    """
    header, rows = _read_rows(path)
    if header[: len(leading)] != leading:
        raise SchemaError(path, 1, f"expected leading columns {leading}, found {header}")
    for name in header[len(leading):]:
        if not any(name.startswith(p) for p in prefix_groups):
            raise SchemaError(path, 1, f"unexpected column {name!r}")
    columns: dict[str, list] = {name: [] for name in header}
    for k, row in enumerate(rows):
        line = k + 2
        if len(row) != len(header):
            raise SchemaError(path, line, f"expected {len(header)} fields, found {len(row)}")
        for name, token in zip(header, row):
            if name in string_columns:
                columns[name].append(token)
            elif token == "":
                columns[name].append(np.nan)
            else:
                columns[name].append(_parse_float(token, path, line, name))
    return {name: np.array(tokens) for name, tokens in columns.items()}


def snapshot_time_from_name(name: str) -> float:
    match = SNAPSHOT_PATTERN.match(name)
    if match is None:
        raise SchemaError(name, None, "not a density snapshot filename")
    return float(match.group(2))


def discover_snapshots(run_dir) -> dict[str, dict[float, Path]]:
    """Map tier -> {snapshot time -> file} for a run directory."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise SchemaError(run_dir, None, "run directory not found")
    found: dict[str, dict[float, Path]] = {"micro": {}, "macro": {}}
    for path in sorted(run_dir.iterdir()):
        match = SNAPSHOT_PATTERN.match(path.name)
        if match:
            found[match.group(1)][float(match.group(2))] = path
    return found


def read_geometry(run_dir) -> RunGeometry | None:
    """Window and obstacle rectangles from the run's scenario.json;
    None when the file is absent (figures then skip the outlines)."""
    path = Path(run_dir) / "scenario.json"
    if not path.is_file():
        return None
    try:
        data = json.loads(path.read_text())
        dom = data["domain"]
        window = (float(dom["x_min"]), float(dom["x_max"]),
                  float(dom["y_min"]), float(dom["y_max"]))
        obstacles = [
            (float(o["x_min"]), float(o["x_max"]), float(o["y_min"]), float(o["y_max"]))
            for o in dom.get("obstacles", [])
        ]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(path, None, f"unreadable scenario geometry: {exc}") from None
    return RunGeometry(window, obstacles)
