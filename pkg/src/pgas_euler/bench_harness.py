"""Strong- and weak-scaling benchmark protocols and report export.

Strong scaling runs a fixed grid on increasing worker counts and reports the
speedup ``t(1) / t(w)``.  Weak scaling grows the grid with the worker count
(``w`` times the base cell count) and reports the normalized runtime
``t(w) / t(1)``.  Timings are the median over repetitions of the time loop
only; the reduction and repetition count travel with every record.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .euler_core import BoundarySpec, GridSpec, SedovParams, TimeControls, init_sedov
from .strategies import StrategyId, run_simulation

STRONG = "strong"
WEAK = "weak"

CSV_HEADER = ("strategy", "workers", "nx", "ny", "steps", "wall_seconds", "factor")

PARALLEL_STRATEGIES = tuple(s.value for s in StrategyId if s is not StrategyId.SEQUENTIAL)


class NonSquareScaling(ValueError):
    pass


class MixedPlans(ValueError):
    pass


class IoFailure(OSError):
    pass


@dataclass(frozen=True)
class BenchPlan:
    mode: str
    strategies: tuple[str, ...] = PARALLEL_STRATEGIES
    worker_counts: tuple[int, ...] = (1, 2, 4, 8)
    nx: int = 512
    ny: int = 1024
    dt: float = 1e-5
    t_final: float = 0.005
    repetitions: int = 3
    reduction: str = "median"

    def __post_init__(self):
        if self.mode not in (STRONG, WEAK):
            raise ValueError(f"unknown scaling mode {self.mode!r}")
        if list(self.worker_counts) != sorted(set(self.worker_counts)) or not self.worker_counts:
            raise ValueError("worker_counts must be nonempty, strictly ascending")
        if self.worker_counts[0] < 1:
            raise ValueError("worker counts must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.reduction != "median":
            raise ValueError("only the median reduction is supported")
        for s in self.strategies:
            StrategyId(s)

    @classmethod
    def strong_default(cls, **kw) -> "BenchPlan":
        return cls(mode=STRONG, **kw)

    @classmethod
    def weak_default(cls, **kw) -> "BenchPlan":
        kw.setdefault("worker_counts", (1, 4, 16))
        kw.setdefault("nx", 64)
        kw.setdefault("ny", 128)
        kw.setdefault("t_final", 0.001)
        return cls(mode=WEAK, **kw)

    @property
    def steps(self) -> int:
        return TimeControls(self.dt, self.t_final).steps

    def to_json(self) -> str:
        d = asdict(self)
        d["strategies"] = list(self.strategies)
        d["worker_counts"] = list(self.worker_counts)
        d["steps"] = self.steps
        return json.dumps(d, indent=2, sort_keys=True)


@dataclass(frozen=True)
class BenchRecord:
    mode: str
    strategy: str
    workers: int
    nx: int
    ny: int
    steps: int
    wall_seconds: float
    baseline_seconds: float
    repetitions: int = 1
    reduction: str = "median"
    samples: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not (self.wall_seconds > 0 and self.baseline_seconds > 0):
            raise ValueError("timings must be positive")

    @property
    def speedup(self) -> float:
        return self.baseline_seconds / self.wall_seconds

    @property
    def normalized(self) -> float:
        return self.wall_seconds / self.baseline_seconds

    @property
    def factor(self) -> float:
        return self.speedup if self.mode == STRONG else self.normalized


def weak_grid(base_nx: int, base_ny: int, workers: int) -> tuple[int, int]:
    """Grid for ``workers`` cores: double ny, nx, ny, ... once per factor of two."""
    k = round(math.log2(workers)) if workers >= 1 else -1
    if k < 0 or 2**k != workers:
        raise NonSquareScaling(f"{workers} workers is not reachable by doubling the grid")
    nx, ny = base_nx, base_ny
    for i in range(k):
        if i % 2 == 0:
            ny *= 2
        else:
            nx *= 2
    return nx, ny


Runner = Callable[[str, GridSpec, TimeControls, int], float]


def default_runner(strategy: str, grid: GridSpec, tc: TimeControls, workers: int) -> float:
    """Time one run of the blast-wave problem; returns wall seconds of the time loop."""
    field0 = init_sedov(grid, SedovParams())
    _, wall = run_simulation(strategy, field0, tc, BoundarySpec(), workers)
    return wall


def _measure(runner: Runner, plan: BenchPlan, strategy, grid, tc, workers):
    samples = tuple(runner(strategy, grid, tc, workers) for _ in range(plan.repetitions))
    return statistics.median(samples), samples


def _scaling(plan: BenchPlan, grid_for, runner: Runner | None) -> list[BenchRecord]:
    runner = runner or default_runner
    tc = TimeControls(plan.dt, plan.t_final)
    records = []
    for strategy in plan.strategies:
        timings = {}
        counts = list(plan.worker_counts)
        if counts[0] != 1:
            counts.insert(0, 1)
        for w in counts:
            nx, ny = grid_for(w)
            timings[w] = _measure(runner, plan, strategy, GridSpec(nx, ny), tc, w)
        base = timings[1][0]
        for w in plan.worker_counts:
            nx, ny = grid_for(w)
            wall, samples = timings[w]
            records.append(
                BenchRecord(plan.mode, strategy, w, nx, ny, tc.steps, wall, base,
                            plan.repetitions, plan.reduction, samples)
            )
    return records


def run_strong_scaling(plan: BenchPlan, runner: Runner | None = None) -> list[BenchRecord]:
    if plan.mode != STRONG:
        raise ValueError("plan is not a strong-scaling plan")
    return _scaling(plan, lambda w: (plan.nx, plan.ny), runner)


def run_weak_scaling(plan: BenchPlan, runner: Runner | None = None) -> list[BenchRecord]:
    if plan.mode != WEAK:
        raise ValueError("plan is not a weak-scaling plan")
    for w in plan.worker_counts:
        weak_grid(plan.nx, plan.ny, w)
    return _scaling(plan, lambda w: weak_grid(plan.nx, plan.ny, w), runner)


@dataclass(frozen=True)
class SummaryRow:
    strategy: str
    workers: int
    nx: int
    ny: int
    steps: int
    wall_seconds: float
    factor: float

    @property
    def label(self) -> str:
        """Table cell in the ``time (factor)`` style."""
        return f"{self.wall_seconds:.1f} ({self.factor:.1f})"

    def as_csv(self) -> list[str]:
        return [self.strategy, str(self.workers), str(self.nx), str(self.ny), str(self.steps),
                repr(self.wall_seconds), repr(self.factor)]


_ORDER = {s.value: k for k, s in enumerate(StrategyId)}


def summarize(records: Iterable[BenchRecord]) -> list[SummaryRow]:
    records = list(records)
    if not records:
        return []
    modes = {r.mode for r in records}
    steps = {r.steps for r in records}
    if len(modes) > 1 or len(steps) > 1:
        raise MixedPlans(f"records mix modes {sorted(modes)} / step counts {sorted(steps)}")
    if records[0].mode == STRONG and len({(r.nx, r.ny) for r in records}) > 1:
        raise MixedPlans("strong-scaling records must share one grid")
    rows = [
        SummaryRow(r.strategy, r.workers, r.nx, r.ny, r.steps, r.wall_seconds, round(r.factor, 1))
        for r in records
    ]
    return sorted(rows, key=lambda r: (_ORDER.get(r.strategy, len(_ORDER)), r.strategy, r.workers))


def parse_csv(path) -> list[SummaryRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        return [
            SummaryRow(s, int(w), int(nx), int(ny), int(st), float(t), float(f))
            for s, w, nx, ny, st, t, f in reader
        ]


def _write_csv(rows: Sequence[SummaryRow], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv())


def _write_plotscript(rows: Sequence[SummaryRow], path: Path, mode: str) -> None:
    by_strategy: dict[str, list[SummaryRow]] = {}
    for row in rows:
        by_strategy.setdefault(row.strategy, []).append(row)
    ylabel = "speedup" if mode == STRONG else "normalized runtime"
    lines = [
        "# gnuplot script: " + ("strong" if mode == STRONG else "weak") + " scaling",
        "set logscale xy",
        "set xlabel 'cores'",
        f"set ylabel '{ylabel}'",
        "set key left top",
    ]
    plots = []
    for strategy, srows in by_strategy.items():
        dat = path.with_name(f"{path.stem}_{strategy}.dat")
        with open(dat, "w") as fh:
            fh.write("# workers factor wall_seconds\n")
            for r in srows:
                fh.write(f"{r.workers} {r.factor!r} {r.wall_seconds!r}\n")
        plots.append(f"'{dat.name}' using 1:2 with linespoints title '{strategy}'")
    if rows:
        first = min(rows, key=lambda r: r.workers)
        if mode == STRONG:
            lines.append(f"ideal(x) = {first.factor!r} * x / {first.workers}")
        else:
            lines.append(f"ideal(x) = {first.factor!r}")
        plots.append("ideal(x) with lines lc rgb 'black' title 'ideal'")
    if plots:
        lines.append("plot " + ", \\\n     ".join(plots))
    path.write_text("\n".join(lines) + "\n")


def export_report(rows: Sequence[SummaryRow], format: str, path, mode: str = STRONG) -> None:
    """Write ``rows`` as CSV or as a gnuplot script with sidecar ``.dat`` files."""
    path = Path(path)
    try:
        if format == "csv":
            _write_csv(rows, path)
        elif format == "plotscript":
            _write_plotscript(rows, path, mode)
        else:
            raise ValueError(f"unknown report format {format!r}")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
