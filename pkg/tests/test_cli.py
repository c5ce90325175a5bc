import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgas_euler import bench_harness as bh
from pgas_euler import cli, verification
from pgas_euler.euler_core import GridSpec, SedovParams, init_sedov
from pgas_euler.strategies import StrategyId, drivers


def test_defaults_use_standard_snapshot_times():
    cfg = cli.parse_run_config([])
    assert cfg.snapshots == (0.005, 0.025, 0.075, 0.15)
    assert cfg.snapshot_steps() == [500, 2500, 7500, 15000]
    assert cfg.t_final == 0.15 and cfg.dt == 1e-5


def test_default_snapshots_clip_to_t_final():
    assert cli.parse_run_config(["--t-final", "0.03"]).snapshots == (0.005, 0.025)


configs = st.builds(
    cli.RunConfig,
    strategy=st.sampled_from([s.value for s in StrategyId if s is not StrategyId.SEQUENTIAL]),
    nx=st.integers(8, 64),
    ny=st.integers(8, 64),
    dt=st.floats(1e-7, 1e-4),
    t_final=st.floats(1e-4, 0.2),
    workers=st.integers(1, 4),
    bc_y=st.sampled_from(["inflow_outflow", "periodic"]),
    ghost_band=st.integers(0, 4),
    inflow=st.tuples(st.floats(0.1, 10), st.floats(-1, 1), st.floats(-1, 1), st.floats(1e-5, 10)),
    p_peak=st.floats(1, 2000),
    sigma=st.floats(0.001, 0.1),
    features=st.booleans(),
    snapshots=st.lists(st.floats(0, 1e-4), max_size=4).map(tuple),
    out=st.text("abcxyz_/", min_size=1, max_size=12),
)


@settings(max_examples=150, deadline=None)
@given(configs)
def test_flag_round_trip(cfg):
    assert cli.parse_run_config(cfg.to_flags()) == cfg


def test_invalid_grid_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["simulate", "--grid", "1x32"])
    assert info.value.code == 2
    assert "2x2" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["simulate", "--snapshots", "0.2", "--t-final", "0.1"],
    ["simulate", "--strategy", "sequential", "--workers", "2"],
    ["simulate", "--grid", "8x8", "--workers", "16", "--strategy", "one_sided_halo"],
    ["simulate", "--bc-y", "sideways"],
    ["bench", "--strategy", "bogus"],
    ["bench", "--mode", "weak", "--workers", "1,3"],
    ["bench", "--workers", "4,2"],
    ["verify", "--level", "medium"],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 2


def test_t_final_zero_writes_initial_condition(tmp_path):
    out = tmp_path / "s"
    code = cli.main(["simulate", "--grid", "16x12", "--t-final", "0", "--snapshots", "0", "--out", str(out)])
    assert code == 0
    ic = init_sedov(GridSpec(16, 12))
    for k, name in enumerate(cli.VARIABLES):
        assert np.array_equal(np.loadtxt(out / f"{name}_t0.csv", delimiter=","), ic.data[..., k])
    assert np.array_equal(np.loadtxt(out / "log10_rho_t0.csv", delimiter=","), np.log10(ic.rho))


def test_snapshot_determinism(tmp_path):
    argv = ["simulate", "--grid", "16x16", "--t-final", "3e-05", "--snapshots", "1e-05,3e-05",
            "--strategy", "one_sided_patch", "--workers", "4"]
    assert cli.main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(argv + ["--out", str(tmp_path / "b")]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len(files) == 10
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_snapshots_match_direct_run(tmp_path):
    cfg = cli.RunConfig(strategy="two_sided_row", nx=12, ny=16, t_final=2e-5, workers=2,
                        snapshots=(2e-5,), out=str(tmp_path), features=False)
    assert cli.cmd_simulate(cfg) == 0
    from pgas_euler.strategies import run_simulation
    from pgas_euler.euler_core import TimeControls

    ref, _ = run_simulation("sequential", init_sedov(GridSpec(12, 16), SedovParams.gaussian_only()),
                            TimeControls(1e-5, 2e-5), cfg.boundary())
    got = np.loadtxt(tmp_path / "p_t2e-05.csv", delimiter=",")
    assert np.array_equal(got, ref.p)


def test_run_failure_exit_code(tmp_path, capsys):
    code = cli.main(["simulate", "--grid", "32x32", "--dt", "0.1", "--t-final", "0.1", "--out", str(tmp_path)])
    assert code == 1
    assert "CFL" in capsys.readouterr().err


def _fake_runner(calls):
    def runner(strategy, grid, tc, workers):
        calls.append((strategy, grid.nx, grid.ny, tc.steps, workers))
        return 1.0 / workers

    return runner


def test_bench_strong_defaults(tmp_path, monkeypatch):
    calls = []
    monkeypatch.setattr(bh, "default_runner", _fake_runner(calls))
    assert cli.main(["bench", "--mode", "strong", "--strategy", "one_sided_halo", "--reps", "1",
                     "--out", str(tmp_path)]) == 0
    assert calls == [("one_sided_halo", 512, 1024, 500, w) for w in (1, 2, 4, 8)]
    rows = bh.parse_csv(tmp_path / "strong.csv")
    assert [r.factor for r in rows] == [1.0, 2.0, 4.0, 8.0]
    assert (tmp_path / "strong.gp").exists()


def test_bench_weak_grids(tmp_path, monkeypatch):
    calls = []
    monkeypatch.setattr(bh, "default_runner", _fake_runner(calls))
    assert cli.main(["bench", "--mode", "weak", "--workers", "1,4", "--strategy", "two_sided_row",
                     "--reps", "1", "--out", str(tmp_path)]) == 0
    assert [(c[1], c[2]) for c in calls] == [(64, 128), (128, 256)]
    assert {c[3] for c in calls} == {100}


def test_bench_infeasible_workers_fails(tmp_path):
    code = cli.main(["bench", "--grid", "4x4", "--workers", "1,8", "--strategy", "two_sided_row",
                     "--t-final", "1e-5", "--reps", "1", "--out", str(tmp_path)])
    assert code == 1


def test_verify_quick_passes(capsys):
    assert cli.main(["verify"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4 and all(line.startswith("PASS") for line in lines)


def test_verify_detects_flux_sign_error(monkeypatch, capsys):
    # flip the interface fluxes used by the parallel workers only
    real = drivers.line_fluxes
    monkeypatch.setattr(drivers, "line_fluxes", lambda ext, gas: -real(ext, gas))
    assert cli.main(["verify"]) == 1
    out = capsys.readouterr().out
    assert "FAIL  strategy equivalence" in out


def test_verify_full_runs_500_step_conservation(monkeypatch):
    seen = []
    monkeypatch.setattr(verification, "conservation_drift", lambda n, steps: seen.append((n, steps)) or np.zeros(4))
    monkeypatch.setattr(verification, "check_equivalence", lambda: (True, "stub"))
    monkeypatch.setattr(verification, "check_fused_convergence", lambda: (True, "stub"))
    results = verification.run_checks("full")
    assert seen == [(128, 500)]
    assert [r.name for r in results] == [
        "riemann oracle", "flux consistency", "conservation", "strategy equivalence", "fused convergence"]
