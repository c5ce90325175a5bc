import csv
from pathlib import Path

import pytest

from pgas_euler import bench_harness as bh

GOLDEN = Path(__file__).parent / "golden"

# LEO3, MPI row column of the strong- and weak-scaling tables
STRONG_TIMES = {1: 982.8, 4: 287.9, 16: 107.8, 64: 35.4, 256: 9.2}
STRONG_SPEEDUPS = [1.0, 3.4, 9.1, 27.8, 106.8]
WEAK_TIMES = {1: 3.0, 4: 3.1, 16: 3.6, 64: 4.8, 256: 6.0}
WEAK_FACTORS = [1.0, 1.0, 1.2, 1.6, 2.0]


def table_runner(times):
    calls = []

    def runner(strategy, grid, tc, workers):
        calls.append((strategy, grid.nx, grid.ny, tc.steps, workers))
        return times[workers]

    runner.calls = calls
    return runner


def plan(mode, **kw):
    kw.setdefault("strategies", ("two_sided_row",))
    kw.setdefault("worker_counts", (1, 4, 16, 64, 256))
    kw.setdefault("repetitions", 1)
    make = bh.BenchPlan.strong_default if mode == bh.STRONG else bh.BenchPlan.weak_default
    return make(**kw)


def test_strong_table_speedups():
    runner = table_runner(STRONG_TIMES)
    rows = bh.summarize(bh.run_strong_scaling(plan(bh.STRONG), runner))
    assert [r.factor for r in rows] == STRONG_SPEEDUPS
    assert rows[-1].label == "9.2 (106.8)"
    assert {(c[1], c[2], c[3]) for c in runner.calls} == {(512, 1024, 500)}


def test_weak_table_factors_and_grids():
    runner = table_runner(WEAK_TIMES)
    records = bh.run_weak_scaling(plan(bh.WEAK), runner)
    assert [(r.nx, r.ny) for r in records] == [(64, 128), (128, 256), (256, 512), (512, 1024), (1024, 2048)]
    assert [r.factor for r in bh.summarize(records)] == WEAK_FACTORS
    assert bh.summarize(records)[-1].label == "6.0 (2.0)"


def test_weak_grid_rule():
    assert [bh.weak_grid(64, 128, w) for w in (1, 2, 4, 8, 16)] == [
        (64, 128), (64, 256), (128, 256), (128, 512), (256, 512)]
    for bad in (3, 6, 0):
        with pytest.raises(bh.NonSquareScaling):
            bh.weak_grid(64, 128, bad)


def test_record_factors_are_pure():
    r = bh.BenchRecord(bh.STRONG, "two_sided_row", 256, 512, 1024, 500, 9.2, 982.8)
    assert round(r.speedup, 1) == 106.8
    assert r.speedup == 982.8 / 9.2 and r.normalized == 9.2 / 982.8
    w = bh.BenchRecord(bh.WEAK, "two_sided_row", 4, 128, 256, 100, 6.0, 3.0)
    assert w.factor == 2.0
    one = bh.BenchRecord(bh.STRONG, "two_sided_row", 1, 8, 8, 1, 2.5, 2.5)
    assert one.factor == 1.0
    with pytest.raises(ValueError):
        bh.BenchRecord(bh.STRONG, "x", 1, 8, 8, 1, 0.0, 1.0)


def test_baseline_is_measured_even_if_not_requested():
    runner = table_runner(STRONG_TIMES)
    records = bh.run_strong_scaling(plan(bh.STRONG, worker_counts=(4, 16)), runner)
    assert [r.workers for r in records] == [4, 16]
    assert records[0].baseline_seconds == 982.8
    assert [c[-1] for c in runner.calls] == [1, 4, 16]


def test_median_reduction():
    samples = iter([5.0, 1.0, 3.0, 2.0, 2.0, 2.0])
    records = bh.run_strong_scaling(
        plan(bh.STRONG, worker_counts=(1, 2), repetitions=3), lambda *a: next(samples))
    assert records[0].wall_seconds == 3.0 and records[0].samples == (5.0, 1.0, 3.0)
    assert records[1].wall_seconds == 2.0
    assert records[1].repetitions == 3 and records[1].reduction == "median"


def test_plan_validation():
    with pytest.raises(ValueError):
        bh.BenchPlan(bh.STRONG, worker_counts=(4, 1))
    with pytest.raises(ValueError):
        bh.BenchPlan(bh.STRONG, repetitions=0)
    with pytest.raises(ValueError):
        bh.BenchPlan(bh.STRONG, strategies=("nope",))
    with pytest.raises(ValueError):
        bh.run_weak_scaling(bh.BenchPlan.strong_default())


@pytest.mark.parametrize("name,make", [("strong_plan.json", bh.BenchPlan.strong_default),
                                       ("weak_plan.json", bh.BenchPlan.weak_default)])
def test_default_plans_golden(name, make):
    assert make().to_json() + "\n" == (GOLDEN / name).read_text()


def test_summarize_order_and_determinism():
    recs = [
        bh.BenchRecord(bh.STRONG, "one_sided_halo", 2, 8, 8, 1, 1.0, 2.0),
        bh.BenchRecord(bh.STRONG, "two_sided_row", 2, 8, 8, 1, 1.0, 2.0),
        bh.BenchRecord(bh.STRONG, "two_sided_row", 1, 8, 8, 1, 2.0, 2.0),
    ]
    rows = bh.summarize(recs)
    assert [(r.strategy, r.workers) for r in rows] == [("two_sided_row", 1), ("two_sided_row", 2), ("one_sided_halo", 2)]
    assert bh.summarize(recs) == rows
    assert bh.summarize([]) == []


def test_summarize_rejects_mixed():
    a = bh.BenchRecord(bh.STRONG, "two_sided_row", 1, 8, 8, 1, 1.0, 1.0)
    with pytest.raises(bh.MixedPlans):
        bh.summarize([a, bh.BenchRecord(bh.WEAK, "two_sided_row", 1, 8, 8, 1, 1.0, 1.0)])
    with pytest.raises(bh.MixedPlans):
        bh.summarize([a, bh.BenchRecord(bh.STRONG, "two_sided_row", 2, 8, 8, 2, 1.0, 1.0)])
    with pytest.raises(bh.MixedPlans):
        bh.summarize([a, bh.BenchRecord(bh.STRONG, "two_sided_row", 2, 16, 8, 1, 1.0, 1.0)])


def test_csv_round_trip(tmp_path):
    rows = bh.summarize(bh.run_strong_scaling(plan(bh.STRONG), table_runner(STRONG_TIMES)))
    path = tmp_path / "strong.csv"
    bh.export_report(rows, "csv", path)
    assert bh.parse_csv(path) == rows
    with open(path, newline="") as fh:
        assert tuple(next(csv.reader(fh))) == bh.CSV_HEADER
    first = path.read_bytes()
    bh.export_report(bh.summarize(bh.run_strong_scaling(plan(bh.STRONG), table_runner(STRONG_TIMES))), "csv", path)
    assert path.read_bytes() == first


def test_csv_quoting(tmp_path):
    row = bh.SummaryRow('odd,"name"', 1, 2, 2, 1, 1.0, 1.0)
    bh.export_report([row], "csv", tmp_path / "q.csv")
    assert bh.parse_csv(tmp_path / "q.csv") == [row]


def test_empty_csv(tmp_path):
    bh.export_report([], "csv", tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().strip() == ",".join(bh.CSV_HEADER)


def test_plotscript(tmp_path):
    rows = bh.summarize(bh.run_strong_scaling(plan(bh.STRONG), table_runner(STRONG_TIMES)))
    script = tmp_path / "strong.gp"
    bh.export_report(rows, "plotscript", script, bh.STRONG)
    text = script.read_text()
    assert "set logscale xy" in text
    assert "ideal(x) = 1.0 * x / 1" in text
    dat = (tmp_path / "strong_two_sided_row.dat").read_text().splitlines()[1:]
    assert [float(line.split()[1]) for line in dat] == STRONG_SPEEDUPS
    bh.export_report(rows, "plotscript", tmp_path / "weak.gp", bh.WEAK)
    assert "ideal(x) = 1.0\n" in (tmp_path / "weak.gp").read_text()


def test_io_failure(tmp_path):
    with pytest.raises(bh.IoFailure):
        bh.export_report([], "csv", tmp_path / "missing" / "x.csv")
    with pytest.raises(ValueError):
        bh.export_report([], "pdf", tmp_path / "x.pdf")


def test_default_runner_smoke():
    from pgas_euler.euler_core import GridSpec, TimeControls

    assert bh.default_runner("one_sided_halo", GridSpec(16, 16), TimeControls(1e-5, 2e-5), 2) > 0
