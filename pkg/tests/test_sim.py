import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrxvlp.channel import ChannelCondition
from qrxvlp.cli import main
from qrxvlp.config import from_dict, load_config, with_overrides
from qrxvlp.errors import InvalidParams
from qrxvlp.pipeline import SystemConfig
from qrxvlp.sim import (
    HeatmapRecords,
    LocationSet,
    RunConfig,
    ScenarioTrajectory,
    Sm4Params,
    accuracy_radius,
    gen_scenario,
    run,
    sweep_grid,
    waypoint_trajectory,
)
from qrxvlp.sim import io
from qrxvlp.sim.engine import MAX_RATE

FAST = SystemConfig(sample_rate=30e3)


# -- scenarios ---------------------------------------------------------------

def test_sm3_offset_zero_is_parallel_and_dead_ahead():
    s = gen_scenario("SM3")
    assert isinstance(s, LocationSet)
    st0 = s.states()[0]
    assert st0.p1[0] == pytest.approx(0.0) and st0.p2[0] == pytest.approx(1.6)
    assert st0.tx_facings == pytest.approx((math.pi, math.pi))
    np.testing.assert_allclose(s.targets[[0, -1], 0], [0.0, 3.5])


def test_sm4_grid_bounds():
    s = gen_scenario("SM4")
    assert s.targets[:, 0].min() == -3.0 and s.targets[:, 0].max() == 3.0
    assert s.targets[:, 1].max() == 15.0
    assert len(np.unique(s.targets[:, 2])) == 10


@pytest.mark.parametrize("preset", ["SM1", "SM2"])
def test_dynamic_presets_last_one_second_and_are_plausible(preset):
    s = gen_scenario(preset)
    assert s.duration == pytest.approx(1.0)
    assert np.all(np.diff(s.t) > 0)
    assert np.abs(s.curvature()).max() <= 0.2
    speed = np.hypot(*np.gradient(s.target[:, :2], s.t, axis=0).T)
    assert speed.min() * 3.6 >= 30


def test_pose_interpolation():
    s = gen_scenario("SM2")
    ego, tgt = s.pose_at(0.5)
    assert ego.y == pytest.approx(12.5)
    assert s.relative_state(0.5).p1[1] > 0
    assert s.relative_speed().shape == s.t.shape


def test_invalid_params():
    with pytest.raises(InvalidParams):
        gen_scenario("SM9")
    with pytest.raises(InvalidParams):
        gen_scenario("SM2", t_join=0.8)
    with pytest.raises(InvalidParams):
        gen_scenario("SM4", step=-1.0)
    with pytest.raises(InvalidParams):
        gen_scenario("SM2", start=(-3.5, 7.0), t_join=0.1)  # far too sharp a turn
    with pytest.raises(InvalidParams):
        gen_scenario("SM3", bogus=1)
    with pytest.raises(InvalidParams):
        ScenarioTrajectory(np.array([0.0, 0.0]), np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(InvalidParams):
        waypoint_trajectory([0.2, 1.0], [0, 0], [5, 5], 25.0)


# -- engine ------------------------------------------------------------------

def test_run_config_validation():
    with pytest.raises(InvalidParams):
        RunConfig(rate=5.0)
    with pytest.raises(InvalidParams):
        RunConfig(rate=2 * MAX_RATE)
    with pytest.raises(InvalidParams):
        RunConfig(rate=300.0)
    with pytest.raises(InvalidParams):
        RunConfig(error_reference="late")


@pytest.mark.parametrize("rate", [50, 125, 250])
def test_cycle_count_and_midpoint_timestamps(rate):
    r = run(RunConfig("SM2", system=FAST, rate=rate, noise=False))
    assert r.n_cycles == int(1.0 * rate)
    np.testing.assert_allclose(r.t, (np.arange(r.n_cycles) + 0.5) / rate)


def test_noiseless_static_run_is_exact():
    r = run(RunConfig("SM3", system=FAST, rate=50, noise=False, channel=ChannelCondition()))
    assert r.valid_both.all()
    assert np.nanmax(r.e_norm) < 1e-3


def test_run_is_deterministic():
    cfg = RunConfig("SM2", system=FAST, rate=100, seed=9, n_repeats=2)
    a, b = run(cfg), run(cfg)
    np.testing.assert_array_equal(a.p_hat, b.p_hat)
    np.testing.assert_array_equal(a.valid, b.valid)


def test_repeat_chunking_does_not_change_results():
    base = dict(scenario="SM2", system=FAST, rate=100, seed=2, n_repeats=3)
    a = run(RunConfig(**base, repeat_chunk=1))
    b = run(RunConfig(**base, repeat_chunk=3))
    np.testing.assert_array_equal(a.p_hat, b.p_hat)


def test_sm2_loses_estimates_at_the_end():
    r = run(RunConfig("SM2", system=FAST, rate=100, noise=False))
    assert r.valid_both[0, :80].all()
    assert not r.valid_both[0, -3:].any()


def test_hold_reference_is_later_truth():
    mid = run(RunConfig("SM1", system=FAST, rate=50, noise=False))
    hold = run(RunConfig("SM1", system=FAST, rate=50, noise=False, error_reference="hold"))
    np.testing.assert_array_equal(mid.p_hat, hold.p_hat)
    assert np.nanmean(hold.e_norm) > 10 * np.nanmean(mid.e_norm)


@settings(max_examples=5)
@given(st.floats(20, 40), st.floats(5, 30))
def test_wider_cone_never_reduces_availability(narrow, extra):
    def avail(deg):
        sysc = SystemConfig(sample_rate=30e3, emission_half_angle=math.radians(deg))
        return run(RunConfig("SM2", system=sysc, rate=50, noise=False)).availability

    assert avail(narrow + extra) >= avail(narrow)


def test_summary_fields():
    s = run(RunConfig("SM2", system=FAST, rate=50)).summary()
    assert set(s) >= {"availability", "mean_err_m", "median_err_m", "p95_err_m", "cycles"}


# -- sweep -------------------------------------------------------------------

SMALL = Sm4Params(x_max=1.0, y_min=1.0, y_max=4.0, step=1.0, orientations_deg=(-20.0, 0.0, 20.0))


def test_sweep_small_grid():
    recs = sweep_grid(FAST, [ChannelCondition("night", "clear")], SMALL, rate=50, seed=1)
    rec = recs["night/clear"]
    assert len(rec) == 3 * 4
    assert np.all((rec.availability >= 0) & (rec.availability <= 1))
    near = (rec.y == 1.0) & (rec.x == 1.0)
    assert rec.n_feasible[near][0] == 0 and np.isnan(rec.mean_err[near][0])
    ok = np.isfinite(rec.mean_err)
    assert ok.sum() >= 6


def test_sweep_noiseless_errors_tiny():
    rec = sweep_grid(FAST, ChannelCondition(), SMALL, rate=50, noise=False)["night/clear"]
    assert np.nanmax(rec.mean_err) < 1e-3


def test_accuracy_radius_on_synthetic_map():
    x = np.zeros(20)
    y = np.arange(1, 21, dtype=float)
    err = np.where(y < 7.5, 0.02, np.where(y < 11.5, 0.5, 3.0))
    rec = HeatmapRecords(x, y, err, np.ones(20), np.ones(20, int))
    assert accuracy_radius(rec, 0.1) == 8.0
    assert accuracy_radius(rec, 1.0) == 12.0
    empty = HeatmapRecords(x, y, np.full(20, np.nan), np.zeros(20), np.zeros(20, int))
    assert accuracy_radius(empty, 0.1) == 0.0


# -- io, config, cli ---------------------------------------------------------

def _read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_trace_csv_header_and_rows(tmp_path):
    r = run(RunConfig("SM2", system=FAST, rate=50))
    io.write_trace(r, tmp_path / "trace.csv")
    rows = _read(tmp_path / "trace.csv")
    assert rows[0] == io.TRACE_HEADER
    assert len(rows) == 51


def test_config_hash_stable():
    assert io.config_hash(RunConfig()) == io.config_hash(RunConfig())
    assert io.config_hash(RunConfig()) != io.config_hash(RunConfig(seed=1))


def test_default_config_matches_reference_values():
    cfg = load_config()
    assert cfg.system.tia.R_F == 2840 and cfg.system.tia.C_T == 45e-12
    assert cfg.system.optics.d_L == 7.1 and cfg.system.txs[0].lambertian_order == 11
    assert cfg.channel.label == "night/clear"


def test_config_file_round_trip(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text(
        '[channel]\nambient = "day"\nweather = "fog"\n'
        '[transmitter]\nhalf_power_angle_deg = 30\nemission_half_angle_deg = 60\n'
        '[run]\nscenario = "SM1"\nrate = 250\nseed = 3\n'
        '[scenario]\nego_speed = 20.0\n'
        '[sweep]\nconditions = [["night", "rain"]]\nstep = 1.0\n'
    )
    cfg = with_overrides(load_config(p), seed=8, repeats=2)
    assert cfg.channel.label == "day/fog"
    assert cfg.system.txs[0].lambertian_order == 4
    assert cfg.system.emission_half_angle == pytest.approx(math.radians(60))
    assert cfg.run.rate == 250 and cfg.run.seed == 8 and cfg.run.n_repeats == 2
    assert cfg.run.scenario_params == {"ego_speed": 20.0}
    assert cfg.sweep.conditions == (("night", "rain"),) and cfg.sweep.grid.step == 1.0


@pytest.mark.parametrize("doc", [{"nope": {}}, {"tia": {"open_loop_gain": 10.0}}, {"run": {"rate": 7}},
                                 {"channel": {"ambient": "dusk"}}, {"optics": {"colour": 1}}])
def test_config_errors(doc):
    with pytest.raises(InvalidParams):
        from_dict(doc)


def _cli_config(tmp_path):
    p = tmp_path / "cli.toml"
    p.write_text(
        '[signal]\nsample_rate = 30000.0\n'
        '[run]\nscenario = "SM2"\nrate = 50\n'
        '[sweep]\nconditions = [["night", "clear"]]\nx_max = 1.0\ny_min = 2.0\ny_max = 4.0\nstep = 1.0\n'
        'orientations_deg = [0.0]\n'
        '[crlb_map]\nx_max = 1.0\ny_min = 2.0\ny_max = 3.0\nstep = 1.0\n'
        '[qrx_design]\nn_points = 19\ntheta_max_deg = 80.0\n'
    )
    return p


@pytest.mark.parametrize("cmd,files", [
    ("qrx-design", ["qrx_design.csv", "qrx_design.svg"]),
    ("run", ["trace.csv", "trace.svg"]),
    ("sweep", ["heatmap.csv", "heatmap.svg"]),
    ("crlb-map", ["crlb_map.csv", "crlb_map.svg"]),
])
def test_cli_subcommands(tmp_path, capsys, cmd, files):
    out = tmp_path / "out"
    rc = main([cmd, "--config", str(_cli_config(tmp_path)), "--out-dir", str(out), "--seed", "1",
               "--format", "csv+svg"])
    assert rc == 0
    for f in files:
        assert (out / f).exists()
    svg = [f for f in files if f.endswith(".svg")][0]
    assert "config-hash" in (out / svg).read_text()


def test_cli_headers(tmp_path):
    cfgp = _cli_config(tmp_path)
    for cmd in ("sweep", "crlb-map", "qrx-design"):
        assert main([cmd, "--config", str(cfgp), "--out-dir", str(tmp_path)]) == 0
    assert _read(tmp_path / "heatmap.csv")[0] == ["x_m", "y_m", "mean_err_m", "availability"]
    assert _read(tmp_path / "crlb_map.csv")[0] == ["x", "y", "sigma_used", "bound_p1_m", "bound_p2_m"]
    assert _read(tmp_path / "qrx_design.csv")[0] == ["theta_deg", "phi"]


def test_cli_reports_bad_config(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text("[tia]\nopen_loop_gain = 10.0\n")
    assert main(["run", "--config", str(p), "--out-dir", str(tmp_path)]) == 2
    assert "InvalidParams" in capsys.readouterr().err


@pytest.mark.slow
def test_sm1_rate_trades_initial_error_for_tracking():
    """Faster rates converge later on cut-in but track the moving target better."""
    cond = ChannelCondition("day", "clear")
    res = {r: run(RunConfig("SM1", channel=cond, rate=r, n_repeats=6, seed=11, error_reference="hold"))
           for r in (50, 250)}

    def window(r, lo, hi):
        x = res[r]
        sel = (x.t >= lo) & (x.t < hi)
        return float(np.nanmean(x.e_norm[:, sel]))

    assert window(50, 0.0, 0.1) < window(250, 0.0, 0.1)
    assert window(250, 0.3, 0.7) < window(50, 0.3, 0.7)
