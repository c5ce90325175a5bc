"""Self-checks behind ``pgas-euler verify``.

The Riemann oracle here is a scalar, pure-Python bisection on the pressure
function.  It shares no code with the vectorized Newton solver it checks.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .euler_core import (
    Axis,
    AxisState,
    BoundarySpec,
    GasModel,
    GridSpec,
    SedovParams,
    TimeControls,
    godunov_interface_flux,
    init_sedov,
    lie_step,
    physical_flux,
    prim_to_cons,
    solve_star,
    total_invariants,
)
from .strategies import StrategyId, run_simulation


def _f_oracle(p, rho, u, pk, gamma):
    a = math.sqrt(gamma * pk / rho)
    if p > pk:
        A = 2.0 / ((gamma + 1.0) * rho)
        B = (gamma - 1.0) / (gamma + 1.0) * pk
        return (p - pk) * math.sqrt(A / (p + B))
    return 2.0 * a / (gamma - 1.0) * ((p / pk) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)


def bisection_star(left, right, gamma=1.4, tol=1e-12):
    """Star ``(p, u)`` by bisection on ``[1e-12, 10]``, widened until bracketed.

    ``left``/``right`` are ``(rho, un, p)`` triples.
    """
    rl, ul, pl = left[0], left[1], left[-1]
    rr, ur, pr = right[0], right[1], right[-1]

    def f(p):
        return _f_oracle(p, rl, ul, pl, gamma) + _f_oracle(p, rr, ur, pr, gamma) + (ur - ul)

    lo, hi = 1e-12, 10.0
    while f(lo) > 0:
        lo *= 1e-3
    while f(hi) < 0:
        hi *= 10.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol or hi - lo <= 1e-16 * mid:
            break
        if fm < 0:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    u = 0.5 * (ul + ur) + 0.5 * (_f_oracle(p, rr, ur, pr, gamma) - _f_oracle(p, rl, ul, pl, gamma))
    return p, u


def random_axis_states(rng: np.random.Generator, n: int, gamma: float = 1.4):
    """Random valid state pairs that cannot generate vacuum."""
    out = []
    while len(out) < n:
        rho = 10.0 ** rng.uniform(-2, 2, size=2)
        p = 10.0 ** rng.uniform(-3, 3, size=2)
        u = rng.uniform(-2, 2, size=2)
        t = rng.uniform(-1, 1, size=2)
        a = np.sqrt(gamma * p / rho)
        if 2.0 / (gamma - 1.0) * (a[0] + a[1]) <= u[1] - u[0]:
            continue
        out.append((AxisState(rho[0], u[0], t[0], p[0]), AxisState(rho[1], u[1], t[1], p[1])))
    return out


def bounded_mach_states(rng: np.random.Generator, n: int, gamma: float = 1.4) -> list[AxisState]:
    """Random states with ``|un|, |ut| <= a``.

    Recovering ``p`` from conserved variables loses about ``M**2`` ulps to
    cancellation, so a 1e-14 comparison against ``physical_flux(U)`` is only
    meaningful at moderate Mach number.
    """
    rho = 10.0 ** rng.uniform(-2, 2, n)
    p = 10.0 ** rng.uniform(-3, 3, n)
    a = np.sqrt(gamma * p / rho)
    un, ut = rng.uniform(-1, 1, (2, n)) * a
    return [AxisState(*s) for s in zip(rho, un, ut, p)]


def flux_deviation(states, gas) -> float:
    """Max relative gap between the Godunov flux of ``(L, L)`` and ``F(U(L))``."""
    worst = 0.0
    for L in states:
        F = godunov_interface_flux(L, L, gas)
        G = physical_flux(prim_to_cons(np.asarray(L), gas), Axis.X, gas)
        worst = max(worst, float(np.max(np.abs(F - G) / np.maximum(np.abs(G), 1e-300))))
    return worst


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def check_riemann_oracle(n_random=1000, seed=0) -> tuple[bool, str]:
    gas = GasModel()
    worst = 0.0
    sod = solve_star(AxisState(1.0, 0.0, 0.0, 1.0), AxisState(0.125, 0.0, 0.0, 0.1), gas)
    ok = abs(sod.p_star - 0.30313) < 5e-6 and abs(sod.u_star - 0.92745) < 5e-6
    for L, R in random_axis_states(np.random.default_rng(seed), n_random):
        ps = solve_star(L, R, gas).p_star
        po, _ = bisection_star(L, R)
        worst = max(worst, abs(ps - po) / po)
    ok = ok and worst <= 1e-8
    return ok, f"sod p*={sod.p_star:.6f} u*={sod.u_star:.6f}; max rel p* error {worst:.2e}"


def check_flux_consistency(n=1000, seed=1) -> tuple[bool, str]:
    gas = GasModel()
    rng = np.random.default_rng(seed)
    worst = flux_deviation(bounded_mach_states(rng, n), gas)
    wild = flux_deviation([L for L, _ in random_axis_states(rng, n)], gas)
    return worst <= 1e-14, f"max rel deviation {worst:.2e} at M<=sqrt2 ({wild:.1e} unrestricted)"


def conservation_drift(n=128, steps=500, dt=1e-5) -> np.ndarray:
    """Relative drift of (mass, x-mom, y-mom, energy) on a fully periodic grid.

    Zero-valued totals are normalized by the L1 norm of their component.
    """
    field = init_sedov(GridSpec(n, n), SedovParams.gaussian_only())
    bc = BoundarySpec.periodic()
    i0 = np.array(total_invariants(field))
    for _ in range(steps):
        field = lie_step(field, dt, bc)
    i1 = np.array(total_invariants(field))
    q = prim_to_cons(field.data, field.gas).reshape(-1, 4)
    scale = np.maximum(np.abs(i0), np.abs(q).sum(axis=0) * field.grid.dx * field.grid.dy)
    return np.abs(i1 - i0) / scale


def check_conservation(n=128, steps=500) -> tuple[bool, str]:
    drift = conservation_drift(n, steps)
    return bool(np.all(drift <= 1e-11)), "drift " + ", ".join(f"{d:.1e}" for d in drift)


def check_equivalence(nx=64, ny=128, steps=100, workers=(1, 2, 4, 8)) -> tuple[bool, str]:
    field0 = init_sedov(GridSpec(nx, ny))
    bc = BoundarySpec()
    tc = TimeControls(1e-5, steps * 1e-5)
    ref, _ = run_simulation(StrategyId.SEQUENTIAL, field0, tc, bc, 1)
    bad = []
    for s in StrategyId:
        if s in (StrategyId.SEQUENTIAL, StrategyId.ONE_SIDED_PATCH_FUSED):
            continue
        for w in workers:
            out, _ = run_simulation(s, field0, tc, bc, w)
            if not np.array_equal(out.data, ref.data):
                bad.append(f"{s.value}@{w}")
    return not bad, "all bitwise identical" if not bad else "differs: " + ", ".join(bad)


def fused_gap(dt, t_final=1e-3, nx=64, ny=128, workers=4) -> float:
    field0 = init_sedov(GridSpec(nx, ny))
    bc = BoundarySpec()
    tc = TimeControls(dt, t_final)
    ref, _ = run_simulation(StrategyId.SEQUENTIAL, field0, tc, bc, 1)
    out, _ = run_simulation(StrategyId.ONE_SIDED_PATCH_FUSED, field0, tc, bc, workers)
    return float(np.max(np.abs(out.data - ref.data)))


def check_fused_convergence() -> tuple[bool, str]:
    coarse, fine = fused_gap(2e-5), fused_gap(1e-5)
    ratio = coarse / fine if fine > 0 else math.inf
    return ratio >= 1.8 and fine > 0, f"gap {coarse:.3e} -> {fine:.3e}, ratio {ratio:.2f}"


def run_checks(level: str = "quick") -> list[CheckResult]:
    if level == "quick":
        checks = [
            ("riemann oracle", lambda: check_riemann_oracle(200)),
            ("flux consistency", lambda: check_flux_consistency(1000)),
            ("conservation", lambda: check_conservation(64, 100)),
            ("strategy equivalence", lambda: check_equivalence(32, 64, 20, (1, 4))),
        ]
    elif level == "full":
        checks = [
            ("riemann oracle", check_riemann_oracle),
            ("flux consistency", check_flux_consistency),
            ("conservation", check_conservation),
            ("strategy equivalence", check_equivalence),
            ("fused convergence", check_fused_convergence),
        ]
    else:
        raise ValueError(f"unknown verification level {level!r}")
    results = []
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed verifier
            ok, detail = False, f"error: {exc!r}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results
