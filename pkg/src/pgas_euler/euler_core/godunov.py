"""Dimension-split first-order Godunov update.

Every driver in the package, sequential or parallel, goes through the same
three kernels here (``conserved``, ``line_fluxes``, ``godunov_update``) on
axis-frame primitive arrays.  Parallel drivers only differ in where ghost
values come from.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import riemann
from .riemann import interface_flux
from .state import (
    Axis,
    FieldState,
    GasModel,
    PrimitiveState,
    check_physical,
    cons_to_prim,
    prim_to_cons,
    to_axis_frame,
    from_axis_frame,
)

PERIODIC = "periodic"
INFLOW_OUTFLOW = "inflow_outflow"


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary treatment: x is always periodic; y is inflow/outflow or periodic.

    ``ghost_band_rows`` extra rows are appended above the top boundary and
    evolved like interior cells to keep outflow reflections out of the
    reported domain.
    """

    y_mode: str = INFLOW_OUTFLOW
    inflow_state: PrimitiveState = PrimitiveState(1.0, 0.0, 0.0, 1e-4)
    ghost_band_rows: int = 0
    x_mode: str = PERIODIC

    def __post_init__(self):
        if self.x_mode != PERIODIC:
            raise ValueError("only periodic x boundaries are supported")
        if self.y_mode not in (PERIODIC, INFLOW_OUTFLOW):
            raise ValueError(f"unknown y boundary mode {self.y_mode!r}")
        if self.ghost_band_rows < 0:
            raise ValueError("ghost_band_rows must be nonnegative")
        s = self.inflow_state
        if not (s.rho > 0 and s.p > 0):
            raise ValueError("inflow state must have positive density and pressure")

    @classmethod
    def periodic(cls) -> "BoundarySpec":
        return cls(y_mode=PERIODIC)

    def is_periodic(self, axis: Axis) -> bool:
        return axis is Axis.X or self.y_mode == PERIODIC

    def inflow_axis_state(self, axis: Axis) -> np.ndarray:
        return to_axis_frame(np.asarray(self.inflow_state, dtype=np.float64), axis)


def ghost_pair(first: np.ndarray, last: np.ndarray, bc: BoundarySpec, axis: Axis):
    """Ghost cells for the low and high ends of lines at a physical boundary.

    ``first`` and ``last`` are the first and last interior cells of each
    line, in the axis frame.  For periodic axes the low ghost is ``last``.
    """
    if bc.is_periodic(axis):
        return last, first
    return np.broadcast_to(bc.inflow_axis_state(axis), first.shape), last


def fill_ghosts(line: np.ndarray, bc: BoundarySpec, axis: Axis) -> np.ndarray:
    """Pad lines ``(..., n, 4)`` with one ghost cell on each end."""
    line = np.asarray(line, dtype=np.float64)
    if line.shape[-2] < 1:
        raise ValueError("cannot pad an empty line")
    lo, hi = ghost_pair(line[..., 0, :], line[..., -1, :], bc, axis)
    out = np.empty(line.shape[:-2] + (line.shape[-2] + 2, 4))
    out[..., 0, :] = lo
    out[..., 1:-1, :] = line
    out[..., -1, :] = hi
    return out


def conserved(w: np.ndarray, gas: GasModel) -> np.ndarray:
    return prim_to_cons(w, gas)


def line_fluxes(ext: np.ndarray, gas: GasModel) -> np.ndarray:
    """Interface fluxes of ghost-padded lines: ``(..., m, 4) -> (..., m-1, 4)``."""
    return interface_flux(ext[..., :-1, :], ext[..., 1:, :], gas.gamma)


def godunov_update(w, u, f_lo, f_hi, dtdx: float, gas: GasModel) -> np.ndarray:
    """New primitive cells from the conserved update ``U + dt/dx (F_lo - F_hi)``.

    Cells whose increment is exactly zero keep their primitive values
    unchanged, so a conversion round trip never perturbs a resting state.
    ``u`` may be ``None``; the conserved states are then formed only for
    cells that change.
    """
    if riemann.USE_JIT:
        return _godunov_update_jit(w, u, f_lo, f_hi, dtdx, gas)
    du = dtdx * (f_lo - f_hi)
    moving = np.any(du != 0.0, axis=-1)
    w_new = np.array(w, dtype=np.float64, copy=True)
    if moving.all():
        u = conserved(w, gas) if u is None else u
        return cons_to_prim(u + du, gas)
    if moving.any():
        u_m = conserved(w[moving], gas) if u is None else u[moving]
        w_new[moving] = cons_to_prim(u_m + du[moving], gas)
    return w_new


def _godunov_update_jit(w, u, f_lo, f_hi, dtdx, gas):
    w = np.asarray(w, dtype=np.float64)
    shape = w.shape

    def flat(a):
        return np.ascontiguousarray(np.broadcast_to(a, shape), dtype=np.float64).reshape(-1, 4)

    out = np.empty(shape)
    wf = flat(w)
    uf = wf if u is None else flat(u)
    bad = riemann._flux_jit.update_kernel(
        wf, uf, u is not None, flat(f_lo), flat(f_hi), float(dtdx), float(gas.gamma), out.reshape(-1, 4)
    )
    if bad:
        check_physical(out)
    return out


def update_lines(ext: np.ndarray, dtdx: float, gas: GasModel) -> np.ndarray:
    """One Godunov step on ghost-padded axis-frame lines ``(..., n+2, 4)``."""
    ext = np.ascontiguousarray(ext, dtype=np.float64)
    w = ext[..., 1:-1, :]
    flux = line_fluxes(ext, gas)
    return godunov_update(w, None, flux[..., :-1, :], flux[..., 1:, :], dtdx, gas)


def rows_to_lines(block: np.ndarray, axis: Axis) -> np.ndarray:
    """Field-layout block ``(rows, cols, 4)`` to axis-frame lines along ``axis``."""
    w = to_axis_frame(block, axis)
    if axis is Axis.Y:
        w = w.transpose(1, 0, 2)
    return np.ascontiguousarray(w)


def lines_to_rows(lines: np.ndarray, axis: Axis) -> np.ndarray:
    w = lines.transpose(1, 0, 2) if axis is Axis.Y else lines
    return np.ascontiguousarray(from_axis_frame(w, axis))


def sweep_axis(field: FieldState, axis: Axis, dt: float, bc: BoundarySpec) -> FieldState:
    dtdx = dt / field.grid.width(axis)
    lines = rows_to_lines(field.data, axis)
    new = update_lines(fill_ghosts(lines, bc, axis), dtdx, field.gas)
    return FieldState(field.grid, field.gas, lines_to_rows(new, axis))


def lie_step(field: FieldState, dt: float, bc: BoundarySpec) -> FieldState:
    """x-sweep followed by y-sweep, each over the full time step."""
    return sweep_axis(sweep_axis(field, Axis.X, dt, bc), Axis.Y, dt, bc)


def extend_ghost_band(field: FieldState, rows: int) -> FieldState:
    """Append ``rows`` copies of the top row above the domain."""
    if rows == 0:
        return field
    from .state import GridSpec

    g = field.grid
    grid = GridSpec(g.nx, g.ny + rows, g.lx, g.ly + rows * g.dy)
    top = np.repeat(field.data[-1:], rows, axis=0)
    return FieldState(grid, field.gas, np.concatenate([field.data, top], axis=0))


def crop_ghost_band(field: FieldState, rows: int, grid) -> FieldState:
    if rows == 0:
        return field
    return FieldState(grid, field.gas, field.data[: grid.ny])


__all__ = [
    "BoundarySpec",
    "PERIODIC",
    "INFLOW_OUTFLOW",
    "check_physical",
    "conserved",
    "crop_ghost_band",
    "extend_ghost_band",
    "fill_ghosts",
    "ghost_pair",
    "godunov_update",
    "lie_step",
    "line_fluxes",
    "lines_to_rows",
    "rows_to_lines",
    "sweep_axis",
    "update_lines",
]
