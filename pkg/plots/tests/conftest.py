"""Synthetic run directories conforming to the documented CSV schemas.

Built by hand (not via the simulator) so these tests pin the file
contract itself.
"""
import json
from pathlib import Path

import numpy as np
import pytest

NX, NY = 8, 4
DX = DY = 0.25
X_MIN, Y_MIN = -1.0, -0.5


def density_rows(values: np.ndarray, tier: str) -> list[str]:
    rows = []
    for i in range(NX):
        for j in range(NY):
            x = X_MIN + (i + 0.5) * DX
            y = Y_MIN + (j + 0.5) * DY
            u = float(values[i, j])
            if tier == "micro":
                rows.append(f"{i},{j},{x!r},{y!r},{u!r}")
            else:
                rows.append(f"{i},{j},{x!r},{y!r},{u / 2!r},{u / 2!r}")
    return rows


def write_run(root: Path, times=(0.0, 1.0), tiers=("micro", "macro")) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(99)
    for t in times:
        field = rng.uniform(0.0, 2.0, size=(NX, NY))
        for tier in tiers:
            header = ("i,j,x_center,y_center,u_mic" if tier == "micro"
                      else "i,j,x_center,y_center,u0,u1")
            lines = [header] + density_rows(field + (0.1 if tier == "macro" else 0.0), tier)
            (root / f"{tier}_t{t:g}.csv").write_text("\n".join(lines) + "\n")
    mb_lines = ["t,tier,mb_-1,mb_0"]
    for t in times:
        mb_lines.append(f"{t!r},micro,{0.9 - 0.2 * t!r},{1.0!r}")
        mb_lines.append(f"{t!r},macro,{0.88 - 0.2 * t!r},{0.99!r}")
    (root / "mass_balance.csv").write_text("\n".join(mb_lines) + "\n")
    err_lines = ["t,l1,l2"] + [f"{t!r},{0.3 + 0.01 * t!r},{0.2!r}" for t in times]
    (root / "error_vs_time.csv").write_text("\n".join(err_lines) + "\n")
    scenario = {
        "name": "synthetic",
        "domain": {"x_min": X_MIN, "x_max": X_MIN + NX * DX,
                   "y_min": Y_MIN, "y_max": Y_MIN + NY * DY,
                   "obstacles": [{"x_min": 0.0, "x_max": 0.5, "y_min": 0.25, "y_max": 0.5}],
                   "closed": False},
    }
    (root / "scenario.json").write_text(json.dumps(scenario))
    return root


@pytest.fixture
def run_dir(tmp_path) -> Path:
    return write_run(tmp_path / "run")
