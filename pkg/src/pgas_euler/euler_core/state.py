"""Fluid state containers and conversions between physical and conserved form.

Cell data is stored as float arrays whose last axis holds the four
components.  Primitive order is ``(rho, u, v, p)``; conserved order is
``(rho, rho*u, rho*v, E)``.  The scalar ``NamedTuple`` types exist for
single-cell use and are accepted wherever an array is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Union

import numpy as np


class NonPhysicalState(ArithmeticError):
    """Raised when a state has non-positive density or pressure."""


class Axis(Enum):
    X = 0
    Y = 1


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")


class PrimitiveState(NamedTuple):
    rho: float
    u: float
    v: float
    p: float


class ConservedState(NamedTuple):
    rho: float
    mx: float
    my: float
    e: float


class AxisState(NamedTuple):
    """Primitive state rotated onto a sweep axis (normal, transverse)."""

    rho: float
    un: float
    ut: float
    p: float


StateLike = Union[PrimitiveState, ConservedState, AxisState, np.ndarray]


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.nx}x{self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("domain lengths must be positive")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    def width(self, axis: Axis) -> float:
        return self.dx if axis is Axis.X else self.dy


@dataclass(frozen=True)
class TimeControls:
    dt: float
    t_final: float
    steps: int = field(init=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        steps = int(round(self.t_final / self.dt))
        if steps < 1:
            raise ValueError(f"t_final={self.t_final} gives no time steps at dt={self.dt}")
        object.__setattr__(self, "steps", steps)


@dataclass
class FieldState:
    """Primitive variables on a grid, ``data.shape == (ny, nx, 4)``.

    Row ``j`` is the ``j``-th cell from the bottom; ``x`` is the fastest index.
    """

    grid: GridSpec
    gas: GasModel
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.shape != (self.grid.ny, self.grid.nx, 4):
            raise ValueError(
                f"data shape {self.data.shape} does not match grid {self.grid.ny}x{self.grid.nx}x4"
            )

    @classmethod
    def uniform(cls, grid: GridSpec, state, gas: GasModel | None = None) -> "FieldState":
        data = np.empty((grid.ny, grid.nx, 4))
        data[...] = np.asarray(state, dtype=np.float64)
        return cls(grid, gas or GasModel(), data)

    def copy(self) -> "FieldState":
        return FieldState(self.grid, self.gas, self.data.copy())

    def validate(self) -> None:
        check_physical(self.data)

    @property
    def rho(self) -> np.ndarray:
        return self.data[..., 0]

    @property
    def u(self) -> np.ndarray:
        return self.data[..., 1]

    @property
    def v(self) -> np.ndarray:
        return self.data[..., 2]

    @property
    def p(self) -> np.ndarray:
        return self.data[..., 3]


def check_physical(prim: np.ndarray) -> None:
    rho = prim[..., 0]
    p = prim[..., 3]
    # written so that NaN also fails
    if not (np.all(rho > 0) and np.all(p > 0)):
        bad = np.argwhere(~((rho > 0) & (p > 0)))
        raise NonPhysicalState(
            f"{len(bad)} cell(s) with non-positive density or pressure, first at {tuple(bad[0])}"
        )


def prim_to_cons(prim: StateLike, gas: GasModel) -> StateLike:
    """Physical ``(rho, u, v, p)`` to conserved ``(rho, rho u, rho v, E)``."""
    w = np.asarray(prim, dtype=np.float64)
    rho, u, v, p = w[..., 0], w[..., 1], w[..., 2], w[..., 3]
    out = np.empty_like(w)
    out[..., 0] = rho
    out[..., 1] = rho * u
    out[..., 2] = rho * v
    out[..., 3] = 0.5 * rho * (u * u + v * v) + p / (gas.gamma - 1.0)
    if isinstance(prim, tuple):
        return ConservedState(*(float(c) for c in out))
    return out


def cons_to_prim(cons: StateLike, gas: GasModel) -> StateLike:
    """Inverse of :func:`prim_to_cons`; raises :class:`NonPhysicalState`."""
    q = np.asarray(cons, dtype=np.float64)
    rho, mx, my, e = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty_like(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = mx / rho
        v = my / rho
        out[..., 0] = rho
        out[..., 1] = u
        out[..., 2] = v
        out[..., 3] = (gas.gamma - 1.0) * (e - 0.5 * rho * (u * u + v * v))
    check_physical(out)
    if isinstance(cons, tuple):
        return PrimitiveState(*(float(c) for c in out))
    return out


def physical_flux(cons: StateLike, axis: Axis, gas: GasModel) -> np.ndarray:
    """Euler flux ``F(U)`` (axis X) or ``G(U)`` (axis Y) of conserved states."""
    q = np.asarray(cons, dtype=np.float64)
    w = cons_to_prim(q, gas)
    rho, u, v, p = w[..., 0], w[..., 1], w[..., 2], w[..., 3]
    e = q[..., 3]
    out = np.empty_like(q)
    if axis is Axis.X:
        out[..., 0] = rho * u
        out[..., 1] = rho * u * u + p
        out[..., 2] = rho * u * v
        out[..., 3] = u * (e + p)
    else:
        out[..., 0] = rho * v
        out[..., 1] = rho * u * v
        out[..., 2] = rho * v * v + p
        out[..., 3] = v * (e + p)
    return out


def sound_speed(prim: StateLike, gas: GasModel):
    w = np.asarray(prim, dtype=np.float64)
    a = np.sqrt(gas.gamma * w[..., 3] / w[..., 0])
    return float(a) if np.ndim(a) == 0 else a


# Component permutation taking (rho, u, v, p) to (rho, un, ut, p) and back;
# it is its own inverse.
_AXIS_ORDER = {Axis.X: (0, 1, 2, 3), Axis.Y: (0, 2, 1, 3)}


def to_axis_frame(prim: np.ndarray, axis: Axis) -> np.ndarray:
    if axis is Axis.X:
        return prim
    return prim[..., _AXIS_ORDER[axis]]


from_axis_frame = to_axis_frame


def max_cfl(field: FieldState, dt: float) -> float:
    w = field.data
    a = np.sqrt(field.gas.gamma * w[..., 3] / w[..., 0])
    cx = dt * np.max(np.abs(w[..., 1]) + a) / field.grid.dx
    cy = dt * np.max(np.abs(w[..., 2]) + a) / field.grid.dy
    return float(max(cx, cy))


def total_invariants(field: FieldState) -> tuple[float, float, float, float]:
    """Domain integrals of mass, both momenta and energy."""
    q = prim_to_cons(field.data, field.gas)
    cell = field.grid.dx * field.grid.dy
    sums = q.reshape(-1, 4).sum(axis=0) * cell
    return tuple(float(s) for s in sums)
