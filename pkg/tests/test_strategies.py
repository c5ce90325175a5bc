from collections import defaultdict

import numpy as np
import pytest

from pgas_euler import comm_runtime as rt
from pgas_euler.euler_core import BoundarySpec, FieldState, GridSpec, SedovParams, TimeControls, init_sedov
from pgas_euler.strategies import (
    CFLViolation,
    StrategyId,
    barrier_count,
    decompose,
    decomposition_mode,
    run_detailed,
    run_simulation,
)
from pgas_euler.strategies import drivers

EXACT = [s for s in StrategyId if s is not StrategyId.ONE_SIDED_PATCH_FUSED]
PARALLEL = [s for s in StrategyId if s is not StrategyId.SEQUENTIAL]


def sedov(nx, ny, **kw):
    return init_sedov(GridSpec(nx, ny), SedovParams(**kw))


@pytest.mark.parametrize("strategy", list(StrategyId))
def test_uniform_field_unchanged(strategy):
    f = FieldState.uniform(GridSpec(12, 16), (1.0, 0.2, -0.1, 0.5))
    n = 1 if strategy is StrategyId.SEQUENTIAL else 4
    out, wall = run_simulation(strategy, f, TimeControls(1e-3, 1e-2), BoundarySpec.periodic(), n)
    assert np.array_equal(out.data, f.data)
    assert wall >= 0


@pytest.mark.parametrize(
    "bc",
    [BoundarySpec(), BoundarySpec.periodic(), BoundarySpec(ghost_band_rows=3)],
    ids=["inflow", "periodic", "ghost-band"],
)
def test_equivalence_small(bc):
    # uneven splits (3, 6 workers) exercise the remainder rule
    f = sedov(20, 30)
    tc = TimeControls(1e-5, 1e-4)
    ref, _ = run_simulation(StrategyId.SEQUENTIAL, f, tc, bc)
    for s in EXACT[1:]:
        for n in (2, 3, 6):
            out, _ = run_simulation(s, f, tc, bc, n)
            assert np.array_equal(out.data, ref.data), (s, n)


def test_fused_is_close_but_not_exact():
    f = sedov(32, 32)
    tc = TimeControls(1e-5, 2e-4)
    bc = BoundarySpec()
    ref, _ = run_simulation(StrategyId.SEQUENTIAL, f, tc, bc)
    out, _ = run_simulation(StrategyId.ONE_SIDED_PATCH_FUSED, f, tc, bc, 4)
    gap = np.max(np.abs(out.data - ref.data) / np.abs(ref.data).max(axis=(0, 1)))
    assert 0 < gap < 1e-2
    # with one row of patches there are no stale row halos
    one_row, _ = run_simulation(StrategyId.ONE_SIDED_PATCH_FUSED, f, tc, bc, 2)
    assert np.array_equal(one_row.data, ref.data)


def test_barrier_counts_table():
    assert barrier_count(StrategyId.SEQUENTIAL) == 0
    assert barrier_count(StrategyId.TWO_SIDED_ROW) == 0
    assert barrier_count(StrategyId.TWO_SIDED_PATCH) == 0
    assert barrier_count(StrategyId.ONE_SIDED_PATCH_FUSED) < barrier_count(StrategyId.ONE_SIDED_PATCH)
    assert barrier_count("one_sided_patch") - barrier_count("one_sided_patch_fused") == 2


@pytest.mark.parametrize("strategy", PARALLEL)
def test_barrier_counts_measured(strategy):
    res = run_detailed(strategy, sedov(16, 16), TimeControls(1e-5, 5e-5), BoundarySpec(), 4)
    assert res.barriers == 5 * barrier_count(strategy)


def test_row_message_counts():
    steps = 6
    res = run_detailed(StrategyId.TWO_SIDED_ROW, sedov(16, 32), TimeControls(1e-5, steps * 1e-5), BoundarySpec(), 4)
    assert res.sends == [steps, 2 * steps, 2 * steps, steps]
    assert res.recvs == res.sends


def test_patch_message_counts():
    steps = 5
    res = run_detailed(StrategyId.TWO_SIDED_PATCH, sedov(24, 24), TimeControls(1e-5, steps * 1e-5), BoundarySpec(), 9)
    # interior patch 4 talks to four neighbours; top/bottom patches have one fewer
    assert res.sends[4] == res.recvs[4] == 4 * steps
    assert res.sends == [3 * steps] * 3 + [4 * steps] * 3 + [3 * steps] * 3
    periodic = run_detailed(StrategyId.TWO_SIDED_PATCH, sedov(24, 24), TimeControls(1e-5, steps * 1e-5),
                            BoundarySpec.periodic(), 9)
    assert periodic.sends == [4 * steps] * 9


def test_snapshots():
    f = sedov(16, 16)
    bc = BoundarySpec()
    res = run_detailed(StrategyId.ONE_SIDED_HALO, f, 4, bc, 2, dt=1e-5, snapshot_steps=(0, 2, 4))
    assert [n for n, _ in res.snapshots] == [0, 2, 4]
    assert np.array_equal(res.snapshots[0][1].data, f.data)
    assert np.array_equal(res.snapshots[-1][1].data, res.field.data)
    mid, _ = run_simulation(StrategyId.SEQUENTIAL, f, TimeControls(1e-5, 2e-5), bc)
    assert np.array_equal(res.snapshots[1][1].data, mid.data)


def _recorder(monkeypatch, name, store):
    real = getattr(drivers, name)

    def wrapped(w, lo, hi, *args):
        store[rt.current_worker()].append((np.array(w), np.array(lo), np.array(hi)))
        return real(w, lo, hi, *args)

    monkeypatch.setattr(drivers, name, wrapped)


@pytest.mark.parametrize(
    "strategy",
    [StrategyId.TWO_SIDED_ROW, StrategyId.SHARED_NAIVE, StrategyId.SHARED_POINTER, StrategyId.ONE_SIDED_HALO,
     StrategyId.TWO_SIDED_PATCH, StrategyId.ONE_SIDED_PATCH],
)
def test_halo_correctness(strategy, monkeypatch):
    ys, xs = defaultdict(list), defaultdict(list)
    _recorder(monkeypatch, "_y_update", ys)
    _recorder(monkeypatch, "_x_update", xs)
    f = sedov(18, 24)
    n = 6
    bc = BoundarySpec.periodic()
    run_detailed(strategy, f, TimeControls(1e-5, 3e-5), bc, n)
    plan = decompose(f.grid, n, decomposition_mode(strategy), y_periodic=True)
    for w, nb in enumerate(plan.neighbors):
        for step, (_, below, above) in enumerate(ys[w]):
            assert np.array_equal(below, ys[nb.down][step][0][-1])
            assert np.array_equal(above, ys[nb.up][step][0][0])
        for step, (_, left, right) in enumerate(xs[w]):
            assert np.array_equal(left, xs[nb.left][step][0][:, -1])
            assert np.array_equal(right, xs[nb.right][step][0][:, 0])
    assert all(len(ys[w]) == 3 for w in range(n))


def test_cfl_violation():
    with pytest.raises(CFLViolation):
        run_simulation(StrategyId.SEQUENTIAL, sedov(64, 64), TimeControls(1e-2, 1e-2), BoundarySpec())


def test_sequential_rejects_workers():
    with pytest.raises(ValueError):
        run_simulation(StrategyId.SEQUENTIAL, sedov(8, 8), TimeControls(1e-5, 1e-5), BoundarySpec(), 2)


def test_scheme_breakdown_surfaces_unwrapped(monkeypatch):
    # disable the CFL guard so a huge step drives a cell nonphysical inside a worker
    f = FieldState.uniform(GridSpec(8, 8), (1.0, 0.0, 0.0, 1.0))
    f.data[4, 4] = (1.0, 0.0, 0.0, 1e4)
    monkeypatch.setattr(drivers, "max_cfl", lambda field, dt: 0.0)
    with pytest.raises(ArithmeticError):
        run_simulation(StrategyId.ONE_SIDED_HALO, f, TimeControls(0.05, 0.2), BoundarySpec.periodic(), 2)
