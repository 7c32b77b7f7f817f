"""Figure rendering against synthetic run directories."""
import numpy as np
import pytest

from conftest import write_run
from pedplots.figures import PlotJob, render, render_errors, render_heatmap, render_mass_balance
from pedplots.io import SchemaError, read_density


def test_heatmap_renders_all_panels(run_dir, tmp_path):
    out = tmp_path / "heat.png"
    result = render_heatmap(run_dir, out)
    assert out.is_file() and out.stat().st_size > 0
    assert result.panels == 4  # two tiers x two times


def test_heatmap_shared_color_scale(run_dir, tmp_path):
    result = render_heatmap(run_dir, tmp_path / "heat.png")
    expected = max(
        read_density(run_dir / name, tier).values.max()
        for name, tier in [("micro_t0.csv", "micro"), ("micro_t1.csv", "micro"),
                           ("macro_t0.csv", "macro"), ("macro_t1.csv", "macro")]
    )
    assert result.color_scale_max == pytest.approx(float(expected))


def test_heatmap_single_tier_and_times(run_dir, tmp_path):
    result = render_heatmap(run_dir, tmp_path / "heat.png", tier="macro", times=(1.0,))
    assert result.panels == 1


def test_heatmap_unknown_time_rejected(run_dir, tmp_path):
    with pytest.raises(SchemaError, match="snapshot times"):
        render_heatmap(run_dir, tmp_path / "heat.png", times=(3.5,))


def test_heatmap_without_geometry_still_renders(tmp_path):
    run = write_run(tmp_path / "run")
    (run / "scenario.json").unlink()
    out = tmp_path / "heat.png"
    render_heatmap(run, out)
    assert out.is_file()


def test_heatmap_micro_only_run(tmp_path):
    run = write_run(tmp_path / "run", tiers=("micro",))
    result = render_heatmap(run, tmp_path / "heat.png")
    assert result.panels == 2


def test_mass_balance_curves(run_dir, tmp_path):
    out = tmp_path / "mb.pdf"
    result = render_mass_balance(run_dir, out)
    assert out.is_file() and out.stat().st_size > 0
    assert result.panels == 1


def test_errors_curves(run_dir, tmp_path):
    out = tmp_path / "err.png"
    render_errors(run_dir, out)
    assert out.is_file() and out.stat().st_size > 0


def test_render_dispatch_and_unknown_type(run_dir, tmp_path):
    render(PlotJob(run_dir, "errors", tmp_path / "e.png"))
    with pytest.raises(ValueError, match="figure type"):
        render(PlotJob(run_dir, "pie", tmp_path / "p.png"))


def test_read_only_consumer(run_dir, tmp_path):
    before = {p.name: p.read_bytes() for p in run_dir.iterdir()}
    render_heatmap(run_dir, tmp_path / "h.png")
    render_mass_balance(run_dir, tmp_path / "m.png")
    render_errors(run_dir, tmp_path / "e.png")
    after = {p.name: p.read_bytes() for p in run_dir.iterdir()}
    assert before == after


def test_deterministic_output(run_dir, tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    render_errors(run_dir, a)
    render_errors(run_dir, b)
    assert a.read_bytes() == b.read_bytes()
