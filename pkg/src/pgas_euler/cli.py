"""Command-line entry point: ``simulate``, ``bench`` and ``verify``.

Exit codes: 0 success, 1 run or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bench_harness as bh
from .euler_core import (
    INFLOW_OUTFLOW,
    PERIODIC,
    BoundarySpec,
    GridSpec,
    PrimitiveState,
    SedovParams,
    init_sedov,
)
from .strategies import StrategyId, decompose, decomposition_mode, run_detailed
from .verification import run_checks

SNAPSHOT_TIMES = (0.005, 0.025, 0.075, 0.15)
VARIABLES = ("rho", "u", "v", "p")
_BC_FLAG = {INFLOW_OUTFLOW: "inflow-outflow", PERIODIC: "periodic"}


class UsageError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like NXxNY, got {text!r}") from None
    return nx, ny


def _strategies(text: str) -> tuple[str, ...]:
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    for name in names:
        try:
            StrategyId(name)
        except ValueError:
            choices = ", ".join(s.value for s in StrategyId)
            raise argparse.ArgumentTypeError(f"unknown strategy {name!r} (choose from {choices})") from None
    return names


@dataclass(frozen=True)
class RunConfig:
    strategy: str = StrategyId.SEQUENTIAL.value
    nx: int = 512
    ny: int = 512
    dt: float = 1e-5
    t_final: float = 0.15
    workers: int = 1
    bc_y: str = INFLOW_OUTFLOW
    ghost_band: int = 0
    inflow: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 1e-4)
    p_peak: float = 1200.0
    sigma: float = 20.48 / 1024
    features: bool = True
    snapshots: tuple[float, ...] = SNAPSHOT_TIMES
    out: str = "snapshots"

    def __post_init__(self):
        try:
            StrategyId(self.strategy)
        except ValueError:
            raise UsageError(f"unknown strategy {self.strategy!r}") from None
        if not self.dt > 0:
            raise UsageError("dt must be positive")
        if self.t_final < 0:
            raise UsageError("t_final must be nonnegative")
        if self.workers < 1:
            raise UsageError("workers must be at least 1")
        if self.strategy == StrategyId.SEQUENTIAL.value and self.workers != 1:
            raise UsageError("the sequential strategy runs on one worker")
        if len(self.inflow) != 4:
            raise UsageError("inflow state needs rho,u,v,p")
        for t in self.snapshots:
            if not 0 <= t <= self.t_final * (1 + 1e-12):
                raise UsageError(f"snapshot time {t} outside [0, {self.t_final}]")
        try:
            self.grid()
            self.boundary()
            self.sedov()
            decompose(GridSpec(self.nx, self.ny + self.ghost_band), self.workers,
                      decomposition_mode(self.strategy))
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def grid(self) -> GridSpec:
        return GridSpec(self.nx, self.ny)

    def boundary(self) -> BoundarySpec:
        return BoundarySpec(y_mode=self.bc_y, inflow_state=PrimitiveState(*self.inflow),
                            ghost_band_rows=self.ghost_band)

    def sedov(self) -> SedovParams:
        return SedovParams(p_peak=self.p_peak, sigma=self.sigma, with_features=self.features)

    def snapshot_steps(self) -> list[int]:
        return [int(round(t / self.dt)) for t in self.snapshots]

    def to_flags(self) -> list[str]:
        """Flags that ``parse_run_config`` maps back to this exact config."""
        flags = [
            "--strategy", self.strategy,
            "--grid", f"{self.nx}x{self.ny}",
            "--dt", repr(self.dt),
            "--t-final", repr(self.t_final),
            "--workers", str(self.workers),
            "--bc-y", _BC_FLAG[self.bc_y],
            "--ghost-band", str(self.ghost_band),
            "--inflow", ",".join(repr(float(x)) for x in self.inflow),
            "--p-peak", repr(self.p_peak),
            "--sigma", repr(self.sigma),
            "--snapshots", ",".join(repr(float(t)) for t in self.snapshots),
            "--out", self.out,
        ]
        if not self.features:
            flags.append("--no-features")
        return flags


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    d = RunConfig.__dataclass_fields__
    p.add_argument("--strategy", default=d["strategy"].default, type=lambda s: _strategies(s)[0])
    p.add_argument("--grid", default=(d["nx"].default, d["ny"].default), type=_grid)
    p.add_argument("--dt", type=float, default=d["dt"].default)
    p.add_argument("--t-final", type=float, default=d["t_final"].default)
    p.add_argument("--workers", type=int, default=d["workers"].default)
    p.add_argument("--bc-y", choices=sorted(_BC_FLAG.values()), default=_BC_FLAG[INFLOW_OUTFLOW])
    p.add_argument("--ghost-band", type=int, default=0, help="extra evolved rows above the top boundary")
    p.add_argument("--inflow", type=_floats, default=d["inflow"].default, help="rho,u,v,p")
    p.add_argument("--p-peak", type=float, default=d["p_peak"].default)
    p.add_argument("--sigma", type=float, default=d["sigma"].default)
    p.add_argument("--no-features", action="store_true", help="pure centred Gaussian, no hill or basin")
    p.add_argument("--snapshots", type=_floats, default=None,
                   help="comma-separated times (default: 0.005,0.025,0.075,0.15 up to t_final)")
    p.add_argument("--out", default=d["out"].default)


def _config_from_args(args) -> RunConfig:
    nx, ny = args.grid
    snaps = args.snapshots
    if snaps is None:
        snaps = tuple(t for t in SNAPSHOT_TIMES if t <= args.t_final) or (args.t_final,)
    bc = {v: k for k, v in _BC_FLAG.items()}[args.bc_y]
    return RunConfig(args.strategy, nx, ny, args.dt, args.t_final, args.workers, bc,
                     args.ghost_band, tuple(args.inflow), args.p_peak, args.sigma,
                     not args.no_features, tuple(snaps), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pgas-euler", description="2D Euler solver with parallel strategies")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the blast-wave problem and write CSV snapshots")
    _add_run_flags(sim)

    bench = sub.add_parser("bench", help="run a strong- or weak-scaling plan")
    bench.add_argument("--mode", choices=(bh.STRONG, bh.WEAK), default=bh.STRONG)
    bench.add_argument("--strategy", type=_strategies, default=None, help="comma-separated list")
    bench.add_argument("--workers", type=_ints, default=None, help="comma-separated worker counts")
    bench.add_argument("--grid", type=_grid, default=None, help="base grid NXxNY")
    bench.add_argument("--dt", type=float, default=None)
    bench.add_argument("--t-final", type=float, default=None)
    bench.add_argument("--reps", type=int, default=None)
    bench.add_argument("--out", default="bench")

    ver = sub.add_parser("verify", help="run the self-check suite")
    ver.add_argument("--level", choices=("quick", "full"), default="quick")
    return parser


def parse_run_config(argv) -> RunConfig:
    """Parse ``simulate`` flags into a RunConfig (raises SystemExit(2) on bad input)."""
    parser = build_parser()
    args = parser.parse_args(["simulate", *argv])
    try:
        return _config_from_args(args)
    except UsageError as exc:
        parser.error(str(exc))


def _time_tag(t: float) -> str:
    return f"{t:.6g}"


def write_snapshot(field, t: float, out: Path) -> list[Path]:
    written = []
    for k, name in enumerate(VARIABLES):
        path = out / f"{name}_t{_time_tag(t)}.csv"
        np.savetxt(path, field.data[..., k], fmt="%.17g", delimiter=",")
        written.append(path)
    path = out / f"log10_rho_t{_time_tag(t)}.csv"
    np.savetxt(path, np.log10(field.data[..., 0]), fmt="%.17g", delimiter=",")
    written.append(path)
    return written


def cmd_simulate(config: RunConfig) -> int:
    field0 = init_sedov(config.grid(), config.sedov())
    steps = config.snapshot_steps()
    res = run_detailed(config.strategy, field0, config.steps, config.boundary(), config.workers,
                       dt=config.dt, snapshot_steps=steps)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    by_step = dict(res.snapshots)
    for t, n in zip(config.snapshots, steps):
        write_snapshot(by_step[n], t, out)
    print(f"{config.strategy} x{config.workers}: {config.steps} steps in {res.wall_seconds:.2f} s, "
          f"{len(config.snapshots)} snapshot(s) in {out}")
    return 0


def _bench_plan(args) -> bh.BenchPlan:
    kw = {}
    if args.strategy is not None:
        kw["strategies"] = args.strategy
    if args.workers is not None:
        kw["worker_counts"] = args.workers
    if args.grid is not None:
        kw["nx"], kw["ny"] = args.grid
    if args.dt is not None:
        kw["dt"] = args.dt
    if args.t_final is not None:
        kw["t_final"] = args.t_final
    if args.reps is not None:
        kw["repetitions"] = args.reps
    make = bh.BenchPlan.strong_default if args.mode == bh.STRONG else bh.BenchPlan.weak_default
    return make(**kw)


def cmd_bench(plan: bh.BenchPlan, out: str) -> int:
    run = bh.run_strong_scaling if plan.mode == bh.STRONG else bh.run_weak_scaling
    rows = bh.summarize(run(plan))
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    bh.export_report(rows, "csv", outdir / f"{plan.mode}.csv", plan.mode)
    bh.export_report(rows, "plotscript", outdir / f"{plan.mode}.gp", plan.mode)
    for row in rows:
        print(f"{row.strategy:24s} {row.workers:4d}  {row.nx}x{row.ny}  {row.label}")
    return 0


def cmd_verify(level: str = "quick") -> int:
    results = run_checks(level)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:22s} {r.detail}  ({r.seconds:.1f} s)")
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate":
        try:
            config = _config_from_args(args)
        except UsageError as exc:
            parser.error(str(exc))
        runner = lambda: cmd_simulate(config)  # noqa: E731
    elif args.command == "bench":
        try:
            plan = _bench_plan(args)
            if plan.mode == bh.WEAK:
                for w in plan.worker_counts:
                    bh.weak_grid(plan.nx, plan.ny, w)
            for s in plan.strategies:
                for w in plan.worker_counts:
                    if s == StrategyId.SEQUENTIAL.value and w != 1:
                        raise ValueError("the sequential strategy runs on one worker")
        except ValueError as exc:
            parser.error(str(exc))
        runner = lambda: cmd_bench(plan, args.out)  # noqa: E731
    else:
        runner = lambda: cmd_verify(args.level)  # noqa: E731
    try:
        return runner()
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
