"""Parallel time-stepping drivers.

Each strategy is a per-worker class with a ``step()`` that advances the
worker's block by one Lie step and a ``block()`` that returns its current
interior cells.  All of them compute with the kernels in
:mod:`pgas_euler.euler_core.godunov`; they differ only in data placement and
in how ghost rows and columns reach the worker.  Because the kernels are
elementwise, every strategy except ``one_sided_patch_fused`` reproduces the
sequential result bit for bit.

Barriers per Lie step:

==========================  =====
sequential, two_sided_*     0
shared_naive/pointer        4 (read/commit pair around each sweep)
shared_barrier              2 (x results visible; fluxes published)
one_sided_halo              2 (around the row fetch)
one_sided_patch             4 (around the column and the row fetch)
one_sided_patch_fused       2 (one fetch of all halos)
==========================  =====
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .. import comm_runtime as rt
from ..euler_core import riemann
from ..euler_core import (
    Axis,
    BoundarySpec,
    FieldState,
    TimeControls,
    lie_step,
    max_cfl,
)
from ..euler_core.godunov import (
    conserved,
    crop_ghost_band,
    extend_ghost_band,
    godunov_update,
    line_fluxes,
    update_lines,
)
from ..euler_core.state import from_axis_frame, to_axis_frame
from .decompose import PATCHES, ROWS, DecompositionPlan, decompose


class StrategyId(str, Enum):
    SEQUENTIAL = "sequential"
    TWO_SIDED_ROW = "two_sided_row"
    TWO_SIDED_PATCH = "two_sided_patch"
    SHARED_NAIVE = "shared_naive"
    SHARED_POINTER = "shared_pointer"
    SHARED_BARRIER = "shared_barrier"
    ONE_SIDED_HALO = "one_sided_halo"
    ONE_SIDED_PATCH = "one_sided_patch"
    ONE_SIDED_PATCH_FUSED = "one_sided_patch_fused"

    def __str__(self) -> str:
        return self.value


class CFLViolation(ValueError):
    pass


_FIELD_Y = (0, 2, 1, 3)


def _x_update(w, left, right, dtdx, gas):
    h, n = w.shape[:2]
    ext = np.empty((h, n + 2, 4))
    ext[:, 0] = left
    ext[:, 1:-1] = w
    ext[:, -1] = right
    return update_lines(ext, dtdx, gas)


def _y_ext(w, below, above):
    h, n = w.shape[:2]
    ext = np.empty((h + 2, n, 4))
    ext[0] = below
    ext[1:-1] = w
    ext[-1] = above
    return to_axis_frame(ext, Axis.Y)


def _y_update(w, below, above, dtdy, gas):
    # rows are the sweep direction here, so no transpose is needed: the
    # kernels are elementwise over everything but the sweep axis
    ext = _y_ext(w, below, above)
    flux = line_fluxes(np.moveaxis(ext, 0, -2), gas)
    flux = np.moveaxis(flux, -2, 0)
    wy = ext[1:-1]
    new = godunov_update(wy, None, flux[:-1], flux[1:], dtdy, gas)
    return np.ascontiguousarray(from_axis_frame(new, Axis.Y))


@dataclass
class _Run:
    strategy: StrategyId
    plan: DecompositionPlan
    field0: FieldState
    bc: BoundarySpec
    dt: float
    steps: int
    network: rt.Network | None = None
    arrays: dict = field(default_factory=dict)
    private: dict = field(default_factory=dict)

    @property
    def gas(self):
        return self.field0.gas

    @property
    def grid(self):
        return self.field0.grid

    @property
    def inflow_row(self):
        return np.asarray(self.bc.inflow_state, dtype=np.float64)


class _Worker:
    barriers_per_step = 0

    def __init__(self, run: _Run, ctx: rt.WorkerContext):
        self.run = run
        self.ctx = ctx
        self.rank = ctx.rank
        self.r0, self.r1, self.c0, self.c1 = run.plan.extent(ctx.rank)
        self.nb = run.plan.neighbors[ctx.rank]
        self.dtdx = run.dt / run.grid.dx
        self.dtdy = run.dt / run.grid.dy
        self.gas = run.gas
        self.ny, self.nx = run.grid.shape

    # physical y boundaries, used when a side has no neighbour
    def _below_physical(self, w):
        return np.broadcast_to(self.run.inflow_row, w[0].shape)

    def _above_physical(self, w):
        return w[-1]

    def block(self) -> np.ndarray:
        raise NotImplementedError

    def step(self) -> None:
        raise NotImplementedError


class _Sequential(_Worker):
    def __init__(self, run, ctx):
        super().__init__(run, ctx)
        self.field = run.field0.copy()

    def step(self):
        self.field = lie_step(self.field, self.run.dt, self.run.bc)

    def block(self):
        return self.field.data


class _LocalBlock(_Worker):
    """Worker holding a private copy of its block."""

    def __init__(self, run, ctx):
        super().__init__(run, ctx)
        self.w = run.field0.data[self.r0 : self.r1, self.c0 : self.c1].copy()

    def block(self):
        return self.w


# -- two-sided message passing ------------------------------------------------


class _TwoSided(_LocalBlock):
    def _exchange_rows(self):
        ep = self.ctx.endpoint
        w = self.w
        below = np.empty_like(w[0])
        above = np.empty_like(w[0])
        tickets = []
        if self.nb.down is not None:
            tickets.append(ep.send_async(self.nb.down, "to_below", w[0]))
            tickets.append(ep.recv_async(self.nb.down, "to_above", below))
        else:
            below[...] = self._below_physical(w)
        if self.nb.up is not None:
            tickets.append(ep.send_async(self.nb.up, "to_above", w[-1]))
            tickets.append(ep.recv_async(self.nb.up, "to_below", above))
        else:
            above[...] = self._above_physical(w)
        rt.wait_all(tickets)
        return below, above

    def _y_sweep(self):
        below, above = self._exchange_rows()
        self.w = _y_update(self.w, below, above, self.dtdy, self.gas)


class _TwoSidedRow(_TwoSided):
    def step(self):
        w = self.w
        # the whole row is local, periodic wrap included
        self.w = _x_update(w, w[:, -1], w[:, 0], self.dtdx, self.gas)
        self._y_sweep()


class _TwoSidedPatch(_TwoSided):
    def step(self):
        ep = self.ctx.endpoint
        w = self.w
        left = np.empty_like(w[:, 0])
        right = np.empty_like(w[:, 0])
        rt.wait_all(
            [
                ep.send_async(self.nb.left, "to_left", w[:, 0]),
                ep.send_async(self.nb.right, "to_right", w[:, -1]),
                ep.recv_async(self.nb.left, "to_right", left),
                ep.recv_async(self.nb.right, "to_left", right),
            ]
        )
        self.w = _x_update(w, left, right, self.dtdx, self.gas)
        self._y_sweep()


# -- shared arrays ------------------------------------------------------------


class _SharedBase(_Worker):
    """Whole field lives in the shared array ``field``."""

    def __init__(self, run, ctx):
        super().__init__(run, ctx)
        self.S = run.arrays["field"]

    def block(self):
        return rt.local_view(self.S, self.rank)

    def _row_global(self, i):
        """One ghost row by per-cell remote reads; ``i`` may be outside [0, ny)."""
        if 0 <= i < self.ny or self.run.plan.y_periodic:
            i %= self.ny
            return np.array([rt.global_read(self.S, i, j) for j in range(self.c0, self.c1)])
        return None

    def _ghost_rows_global(self, own):
        below = self._row_global(self.r0 - 1)
        above = self._row_global(self.r1)
        if below is None:
            below = np.array(self._below_physical(own))
        if above is None:
            above = own[-1].copy()
        return below, above


class _SharedNaive(_SharedBase):
    barriers_per_step = 4

    def _read_own(self):
        return np.array(
            [[rt.global_read(self.S, i, j) for j in range(self.c0, self.c1)] for i in range(self.r0, self.r1)]
        )

    def _write_own(self, new):
        for a, i in enumerate(range(self.r0, self.r1)):
            for b, j in enumerate(range(self.c0, self.c1)):
                rt.global_write(self.S, i, j, new[a, b])

    def step(self):
        w = self._read_own()
        new = _x_update(w, w[:, -1], w[:, 0], self.dtdx, self.gas)
        self.ctx.barrier()
        self._write_own(new)
        self.ctx.barrier()

        w = self._read_own()
        below, above = self._ghost_rows_global(w)
        new = _y_update(w, below, above, self.dtdy, self.gas)
        self.ctx.barrier()
        self._write_own(new)
        self.ctx.barrier()


class _SharedPointer(_SharedBase):
    barriers_per_step = 4

    def step(self):
        mine = rt.local_view(self.S, self.rank)
        new = _x_update(mine, mine[:, -1], mine[:, 0], self.dtdx, self.gas)
        self.ctx.barrier()
        mine[...] = new
        self.ctx.barrier()

        below, above = self._ghost_rows_global(mine)
        new = _y_update(mine, below, above, self.dtdy, self.gas)
        self.ctx.barrier()
        mine[...] = new
        self.ctx.barrier()


class _SharedBarrier(_SharedBase):
    """Two-phase y-sweep: conserved states and face fluxes staged in shared
    scratch arrays, one barrier between the phases.

    Scratch row ``i`` of ``flux`` holds the flux through the lower face of
    cell row ``i``; the top face of the domain is kept privately by the top
    worker.  Scratch arrays cover the owned band only, no halo.
    """

    barriers_per_step = 2

    def __init__(self, run, ctx):
        super().__init__(run, ctx)
        self.U = run.arrays["cons"]
        self.F = run.arrays["flux"]

    def step(self):
        mine = rt.local_view(self.S, self.rank)
        # rows are owned whole, so the x-sweep needs no synchronization
        mine[...] = _x_update(mine, mine[:, -1], mine[:, 0], self.dtdx, self.gas)
        self.ctx.barrier()

        below = self._row_global(self.r0 - 1)
        if below is None:
            below = self._below_physical(mine)
        # only the lower face of each owned row is computed here, plus the
        # domain's top face when there is no worker above
        ext = _y_ext(mine, below, mine[-1])
        wy = ext[1:-1]
        u_mine = rt.local_view(self.U, self.rank)
        u_mine[...] = conserved(wy, self.gas)
        lines = ext if self.nb.up is None else ext[:-1]
        faces = np.moveaxis(line_fluxes(np.moveaxis(lines, 0, -2), self.gas), -2, 0)
        f_mine = rt.local_view(self.F, self.rank)
        f_mine[...] = faces[: self.r1 - self.r0]
        if self.nb.up is None:
            self.run.private["top_face"] = faces[-1].copy()
        self.ctx.barrier()

        if self.nb.up is None:
            f_top = self.run.private["top_face"]
        else:
            i = self.r1 % self.ny
            f_top = np.array([rt.global_read(self.F, i, j) for j in range(self.c0, self.c1)])
        f_hi = np.concatenate([f_mine[1:], f_top[None]], axis=0)
        new = godunov_update(wy, u_mine, f_mine, f_hi, self.dtdy, self.gas)
        mine[...] = from_axis_frame(new, Axis.Y)


# -- one-sided gets -----------------------------------------------------------


class _OneSided(_LocalBlock):
    def __init__(self, run, ctx):
        super().__init__(run, ctx)
        self.S = run.arrays["field"]

    def _publish_rows(self):
        mine = rt.local_view(self.S, self.rank)
        mine[0] = self.w[0]
        mine[-1] = self.w[-1]

    def _publish_cols(self):
        mine = rt.local_view(self.S, self.rank)
        mine[:, 0] = self.w[:, 0]
        mine[:, -1] = self.w[:, -1]

    def _get_rows(self):
        width = self.c1 - self.c0
        below = np.empty((width, 4))
        above = np.empty((width, 4))
        if self.nb.down is not None:
            rt.get_block(self.S, below, ((self.r0 - 1) % self.ny, self.c0), width)
        else:
            below[...] = self._below_physical(self.w)
        if self.nb.up is not None:
            rt.get_block(self.S, above, (self.r1 % self.ny, self.c0), width)
        else:
            above = None  # outflow: filled from the fresh local top row
        return below, above

    def _get_cols(self):
        h = self.r1 - self.r0
        left = np.empty((h, 4))
        right = np.empty((h, 4))
        rt.get_strided(self.S, left, (self.r0, (self.c0 - 1) % self.nx), h, self.nx)
        rt.get_strided(self.S, right, (self.r0, self.c1 % self.nx), h, self.nx)
        return left, right

    def _y_sweep(self, below, above):
        if above is None:
            above = self.w[-1]
        self.w = _y_update(self.w, below, above, self.dtdy, self.gas)


class _OneSidedHalo(_OneSided):
    barriers_per_step = 2

    def step(self):
        w = self.w
        self.w = _x_update(w, w[:, -1], w[:, 0], self.dtdx, self.gas)
        self._publish_rows()
        self.ctx.barrier()
        below, above = self._get_rows()
        self.ctx.barrier()
        self._y_sweep(below, above)


class _OneSidedPatch(_OneSided):
    barriers_per_step = 4

    def step(self):
        self._publish_cols()
        self.ctx.barrier()
        left, right = self._get_cols()
        self.ctx.barrier()
        self.w = _x_update(self.w, left, right, self.dtdx, self.gas)
        self._publish_rows()
        self.ctx.barrier()
        below, above = self._get_rows()
        self.ctx.barrier()
        self._y_sweep(below, above)


class _OneSidedPatchFused(_OneSided):
    """All halos fetched once per step, before the x-sweep.

    Row halos from other workers therefore carry the state from before the
    x-sweep, which makes the scheme differ from the sequential one by a
    first-order-in-dt term along patch boundaries.
    """

    barriers_per_step = 2

    def step(self):
        self._publish_cols()
        self._publish_rows()
        self.ctx.barrier()
        left, right = self._get_cols()
        below, above = self._get_rows()
        self.ctx.barrier()
        self.w = _x_update(self.w, left, right, self.dtdx, self.gas)
        if self.nb.down == self.rank:
            below = self.w[-1]
        if self.nb.up == self.rank:
            above = self.w[0]
        self._y_sweep(below, above)


_WORKERS = {
    StrategyId.SEQUENTIAL: (_Sequential, ROWS),
    StrategyId.TWO_SIDED_ROW: (_TwoSidedRow, ROWS),
    StrategyId.TWO_SIDED_PATCH: (_TwoSidedPatch, PATCHES),
    StrategyId.SHARED_NAIVE: (_SharedNaive, ROWS),
    StrategyId.SHARED_POINTER: (_SharedPointer, ROWS),
    StrategyId.SHARED_BARRIER: (_SharedBarrier, ROWS),
    StrategyId.ONE_SIDED_HALO: (_OneSidedHalo, ROWS),
    StrategyId.ONE_SIDED_PATCH: (_OneSidedPatch, PATCHES),
    StrategyId.ONE_SIDED_PATCH_FUSED: (_OneSidedPatchFused, PATCHES),
}


def barrier_count(strategy) -> int:
    """Barriers executed per Lie step (excluding start/stop synchronization)."""
    return _WORKERS[StrategyId(strategy)][0].barriers_per_step


def decomposition_mode(strategy) -> str:
    return _WORKERS[StrategyId(strategy)][1]


@dataclass
class RunResult:
    field: FieldState
    wall_seconds: float
    barriers: int = 0
    sends: list[int] = field(default_factory=list)
    recvs: list[int] = field(default_factory=list)
    snapshots: list[tuple[int, FieldState]] = field(default_factory=list)


def run_detailed(
    strategy,
    field0: FieldState,
    tc: TimeControls | int,
    bc: BoundarySpec,
    n_workers: int = 1,
    *,
    dt: float | None = None,
    snapshot_steps=(),
) -> RunResult:
    """Run a strategy and return the field plus instrumentation.

    ``tc`` may be a step count when ``dt`` is given (used for snapshot runs
    that start at step 0).  ``barriers`` counts only barriers inside the
    time loop; ``sends``/``recvs`` are per-worker message totals.
    """
    strategy = StrategyId(strategy)
    if isinstance(tc, TimeControls):
        dt, steps = tc.dt, tc.steps
    else:
        steps = int(tc)
    if strategy is StrategyId.SEQUENTIAL and n_workers != 1:
        raise ValueError("the sequential strategy runs on exactly one worker")
    cfl = max_cfl(field0, dt)
    riemann.warm_up()
    if cfl > 1.0:
        raise CFLViolation(f"CFL number {cfl:.3f} exceeds 1 at dt={dt}")

    out_grid = field0.grid
    band = bc.ghost_band_rows
    work = extend_ghost_band(field0, band)
    cls, mode = _WORKERS[strategy]
    plan = decompose(work.grid, n_workers, mode, y_periodic=bc.y_mode == "periodic")
    run = _Run(strategy, plan, work, bc, dt, steps)

    group = rt.WorkerGroup(n_workers)
    if strategy in (StrategyId.TWO_SIDED_ROW, StrategyId.TWO_SIDED_PATCH):
        run.network = rt.Network(n_workers)
    if strategy not in (StrategyId.SEQUENTIAL, StrategyId.TWO_SIDED_ROW, StrategyId.TWO_SIDED_PATCH):
        dist = plan.distribution
        S = rt.alloc_shared(work.grid.shape, dist, group)
        S.load(work.data)
        run.arrays["field"] = S
        if strategy is StrategyId.SHARED_BARRIER:
            run.arrays["cons"] = rt.alloc_shared(work.grid.shape, dist, group)
            run.arrays["flux"] = rt.alloc_shared(work.grid.shape, dist, group)

    snap_at = sorted({int(s) for s in snapshot_steps})
    snapshots: list[tuple[int, FieldState]] = []
    gather = np.empty_like(work.data)
    result = np.empty_like(work.data)

    def crop(data):
        return crop_ghost_band(FieldState(work.grid, work.gas, data), band, out_grid).copy()

    def kernel(ctx: rt.WorkerContext) -> float:
        worker = cls(run, ctx)
        r0, r1, c0, c1 = plan.extent(ctx.rank)

        def publish(buf):
            buf[r0:r1, c0:c1] = worker.block()

        pending = list(snap_at)
        excluded = 0.0
        if pending and pending[0] == 0:
            publish(gather)
            ctx.barrier()
            if ctx.rank == 0:
                snapshots.append((0, crop(gather.copy())))
            ctx.barrier()
            pending.pop(0)
        ctx.barrier()
        t0 = time.perf_counter()
        for n in range(1, steps + 1):
            worker.step()
            if pending and pending[0] == n:
                ts = time.perf_counter()
                pending.pop(0)
                publish(gather)
                ctx.barrier()
                if ctx.rank == 0:
                    snapshots.append((n, crop(gather.copy())))
                ctx.barrier()
                excluded += time.perf_counter() - ts
        ctx.barrier()
        wall = time.perf_counter() - t0 - excluded
        publish(result)
        return wall

    try:
        walls = rt.spawn_spmd(n_workers, kernel, network=run.network, group=group)
    except rt.WorkerPanic as exc:
        if isinstance(exc.cause, ArithmeticError):
            raise exc.cause from exc
        raise

    # start, stop, and two per snapshot are outside the per-step budget
    overhead = 2 + 2 * sum(1 for s in snap_at if 0 <= s <= steps)
    barriers = group.barrier_calls - overhead
    net = run.network
    return RunResult(
        field=crop(result),
        wall_seconds=max(walls),
        barriers=barriers,
        sends=list(net.sends) if net else [0] * n_workers,
        recvs=list(net.recvs) if net else [0] * n_workers,
        snapshots=snapshots,
    )


def run_simulation(strategy, field0: FieldState, tc: TimeControls, bc: BoundarySpec, n_workers: int = 1):
    """Advance ``field0`` by ``tc.steps`` Lie steps; returns ``(field, wall_seconds)``."""
    res = run_detailed(strategy, field0, tc, bc, n_workers)
    return res.field, res.wall_seconds
