"""Scenario loading/validation, presets, CLI behavior and file formats."""
import csv
import json
from pathlib import Path

import numpy as np
import pytest

from conftest import make_raw, make_scenario
from pedflow.cli import main
from pedflow.rates import BandRegion, DiscRegion
from pedflow.scenario import (
    ScenarioError,
    load_preset,
    load_scenario,
    preset_names,
    save_scenario,
    scenario_from_dict,
)


class TestPresets:
    def test_all_presets_load(self):
        names = preset_names()
        assert {"example1", "example1_desk", "example2_lambda1",
                "example2_lambda1_desk", "example2_lambda2",
                "example2_lambda2_desk"} <= set(names)
        for name in names:
            load_preset(name)

    def test_example1_parameters(self):
        sc = load_preset("example1")
        assert sc.forces.comfort_speed == 1.0
        assert sc.forces.relaxation_time == 1.0
        assert sc.forces.destination == (100.0, 0.0)
        assert sc.initial.p_stop == 0.5
        assert sc.initial.rect.x_min == -2.0 and sc.initial.rect.x_max == -1.0
        assert sc.initial.rect.y_min == -1.0 and sc.initial.rect.y_max == 1.0
        assert sc.micro.n_pedestrians == 100
        assert sc.micro.n_replicates == 1000
        assert sc.macro.dx == sc.macro.dy == 1.0 / 40.0
        stopped = sc.rates.stopped
        walking = sc.rates.walking
        assert stopped.default == 10.0 and walking.default == 4.0
        disc_s, = stopped.regions
        disc_w, = walking.regions
        assert isinstance(disc_s, DiscRegion) and disc_s.radius == 0.5
        assert disc_s.value == 6.0 and disc_w.value == 5.0
        k = sc.forces.kernel
        assert (k.amplitude, k.attraction_range, k.repulsion_range, k.offset) == (2.0, 1.0, 0.5, 0.9)

    def test_example2_parameters(self):
        sc = load_preset("example2_lambda1")
        assert sc.forces.relaxation_time == 0.2
        assert sc.initial.p_stop == 0.01
        assert sc.initial.rect.x_min == -2.5 and sc.initial.rect.x_max == -1.0
        assert sc.initial.rect.area == pytest.approx(1.5)
        band_s, = sc.rates.stopped.regions
        band_w, = sc.rates.walking.regions
        assert isinstance(band_s, BandRegion)
        assert (band_s.x_min, band_s.x_max, band_s.value) == (-1.0, 1.0, 1.0)
        assert band_w.value == 1.0
        assert sc.rates.stopped.default == 10.0
        assert sc.rates.walking.default == 0.01
        assert len(sc.domain.obstacles) == 2
        deterministic = load_preset("example2_lambda2")
        assert deterministic.rates.stopped.regions == ()
        assert deterministic.rates.walking.default == 0.01

    def test_desk_variants_scale_down(self):
        for name in ("example1", "example2_lambda1", "example2_lambda2"):
            desk = load_preset(f"{name}_desk")
            assert desk.micro.n_pedestrians == 50
            assert desk.micro.n_replicates == 200
            assert desk.macro.dx == desk.macro.dy == 1.0 / 20.0

    def test_default_dt_respects_rate_bound(self):
        sc = load_preset("example1")
        assert sc.micro.dt == pytest.approx(min(0.01, 0.5 / sc.rates.sup_bound))


class TestValidation:
    def test_dt_rate_bound_violation_named(self):
        with pytest.raises(ScenarioError, match="sup"):
            make_scenario(micro={"dt": 0.15},
                          rates={"stopped": {"default": 10.0}})

    def test_p_stop_range(self):
        with pytest.raises(ScenarioError, match="p_stop"):
            make_scenario(initial={"p_stop": 1.5})

    def test_snapshot_beyond_horizon(self):
        with pytest.raises(ScenarioError, match="snapshot"):
            make_scenario(snapshot_times=[0.0, 5.0], horizon=1.0)

    def test_snapshot_not_on_micro_step(self):
        with pytest.raises(ScenarioError, match="multiple"):
            make_scenario(snapshot_times=[0.0, 0.005], micro={"dt": 0.01})

    def test_initial_rect_overlapping_obstacle(self):
        with pytest.raises(ScenarioError, match="overlaps obstacle"):
            make_scenario(domain={"obstacles": [
                {"x_min": -1.0, "x_max": -0.8, "y_min": -0.2, "y_max": 0.2}]})

    def test_initial_rect_outside_strip(self):
        with pytest.raises(ScenarioError, match="outside the strip"):
            make_scenario(initial={"rect": {"x_min": -1.5, "x_max": -0.5,
                                            "y_min": -1.5, "y_max": 0.5}})

    def test_grid_must_divide_window(self):
        with pytest.raises(ScenarioError, match="divide"):
            make_scenario(macro={"dx": 0.3})

    def test_unknown_region_shape(self):
        with pytest.raises(ScenarioError, match="shape"):
            scenario_from_dict(make_raw(rates={"stopped": {
                "default": 1.0, "regions": [{"shape": "hexagon", "value": 1.0}]}}))

    def test_bad_cfl(self):
        with pytest.raises(ScenarioError, match="cfl"):
            make_scenario(macro={"cfl": 1.5})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="cannot read"):
            load_scenario(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ScenarioError, match="JSON"):
            load_scenario(path)


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        for name in preset_names():
            sc = load_preset(name)
            path = tmp_path / f"{name}.json"
            save_scenario(sc, path)
            assert load_scenario(path) == sc

    def test_tiny_scenario_round_trip(self, tmp_path):
        sc = make_scenario()
        path = tmp_path / "tiny.json"
        save_scenario(sc, path)
        assert load_scenario(path) == sc


def write_tiny(tmp_path: Path, **overrides) -> Path:
    sc = make_scenario(**overrides)
    path = tmp_path / "tiny.json"
    save_scenario(sc, path)
    return path


def read_rows(path: Path) -> list[dict]:
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestCli:
    def test_validate_ok(self, tmp_path, capsys):
        path = write_tiny(tmp_path)
        assert main(["validate", "--scenario", str(path)]) == 0
        assert "valid" in capsys.readouterr().out

    def test_validate_rejects_bad_scenario(self, tmp_path, capsys):
        raw = make_raw(initial={"p_stop": 2.0})
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(raw))
        assert main(["validate", "--scenario", str(path)]) == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["exit_code"] == 2
        assert "p_stop" in err["message"]

    def test_unknown_preset_is_validation_error(self, capsys):
        assert main(["validate", "--scenario", "no_such_preset"]) == 2

    def test_micro_outputs(self, tmp_path):
        path = write_tiny(tmp_path)
        out = tmp_path / "run"
        assert main(["micro", "--scenario", str(path), "--out", str(out)]) == 0
        assert (out / "scenario.json").exists()
        for tag in ("0", "0.05", "0.1"):
            rows = read_rows(out / f"micro_t{tag}.csv")
            assert set(rows[0]) == {"i", "j", "x_center", "y_center", "u_mic"}
        sc = make_scenario()
        cell_area = sc.macro.dx * sc.macro.dy
        mass = sum(float(r["u_mic"]) for r in rows) * cell_area
        assert mass <= 1.0 + 1e-12
        reps = read_rows(out / "micro_replicates.csv")
        assert len(reps) == sc.micro.n_replicates
        assert "stopped_t0.05" in reps[0]
        assert "crossing_x-1" in reps[0]
        mb = read_rows(out / "micro_mass_balance.csv")
        assert set(mb[0]) == {"t", "mb_-1", "mb_0"}

    def test_macro_outputs_and_conservation(self, tmp_path):
        path = write_tiny(tmp_path, domain={"closed": True}, horizon=0.5,
                          snapshot_times=[0.0, 0.5])
        out = tmp_path / "run"
        assert main(["macro", "--scenario", str(path), "--out", str(out)]) == 0
        rows = read_rows(out / "macro_diagnostics.csv")
        masses = [float(r["total_mass"]) for r in rows]
        assert max(abs(m - 1.0) for m in masses) <= 1e-10
        times = [float(r["t"]) for r in rows]
        assert times == sorted(times)
        snap = read_rows(out / "macro_t0.5.csv")
        assert set(snap[0]) == {"i", "j", "x_center", "y_center", "u0", "u1"}

    def test_compare_outputs(self, tmp_path):
        path = write_tiny(tmp_path)
        out = tmp_path / "run"
        assert main(["compare", "--scenario", str(path), "--out", str(out)]) == 0
        err_rows = read_rows(out / "error_vs_time.csv")
        assert [r["t"] for r in err_rows] == ["0.0", "0.05", "0.1"]
        assert all(float(r["l1"]) >= 0 and float(r["l2"]) >= 0 for r in err_rows)
        mb_rows = read_rows(out / "mass_balance.csv")
        assert {r["tier"] for r in mb_rows} == {"micro", "macro"}
        cross = read_rows(out / "crossing.csv")
        assert {r["tier"] for r in cross} == {"micro", "macro"}
        assert {r["definition"] for r in cross} == {"theta=0.999", "all_agents_mean"}

    def test_compare_reruns_byte_identical(self, tmp_path):
        path = write_tiny(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["compare", "--scenario", str(path), "--out", str(out_a)]) == 0
        assert main(["compare", "--scenario", str(path), "--out", str(out_b)]) == 0
        files_a = sorted(p.name for p in out_a.iterdir())
        files_b = sorted(p.name for p in out_b.iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_seed_override_changes_micro_results(self, tmp_path):
        path = write_tiny(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["micro", "--scenario", str(path), "--out", str(out_a),
                     "--seed", "1"]) == 0
        assert main(["micro", "--scenario", str(path), "--out", str(out_b),
                     "--seed", "2"]) == 0
        assert (out_a / "micro_replicates.csv").read_bytes() != \
            (out_b / "micro_replicates.csv").read_bytes()

    def test_snapshot_override(self, tmp_path):
        path = write_tiny(tmp_path)
        out = tmp_path / "run"
        assert main(["macro", "--scenario", str(path), "--out", str(out),
                     "--snapshots", "0,0.1"]) == 0
        assert (out / "macro_t0.csv").exists()
        assert (out / "macro_t0.1.csv").exists()
        assert not (out / "macro_t0.05.csv").exists()

    def test_bad_snapshot_override_rejected(self, tmp_path):
        path = write_tiny(tmp_path)
        assert main(["macro", "--scenario", str(path), "--snapshots", "0,7"]) == 2

    def test_env_var_output_dir(self, tmp_path, monkeypatch):
        path = write_tiny(tmp_path)
        env_dir = tmp_path / "from_env"
        monkeypatch.setenv("PEDFLOW_OUT", str(env_dir))
        assert main(["macro", "--scenario", str(path)]) == 0
        assert (env_dir / "macro_diagnostics.csv").exists()

    def test_workers_flag_keeps_bytes_identical(self, tmp_path):
        path = write_tiny(tmp_path, micro={"n_replicates": 6})
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["micro", "--scenario", str(path), "--out", str(out_a),
                     "--workers", "1"]) == 0
        assert main(["micro", "--scenario", str(path), "--out", str(out_b),
                     "--workers", "3"]) == 0
        for name in ("micro_t0.1.csv", "micro_replicates.csv", "micro_mass_balance.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
