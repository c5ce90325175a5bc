from __future__ import annotations

import math
from dataclasses import dataclass

from ..comm_runtime import Distribution, IncompatibleDistribution
from ..euler_core import GridSpec

ROWS = "rows"
PATCHES = "patches"


class TooManyWorkers(ValueError):
    pass


def patch_factors(n: int) -> tuple[int, int]:
    """Worker grid ``(pr, pc)`` with ``pr * pc == n``, ``pr <= pc``, closest to square."""
    pr = max(d for d in range(1, math.isqrt(n) + 1) if n % d == 0)
    return pr, n // pr


@dataclass(frozen=True)
class Neighbors:
    down: int | None
    up: int | None
    left: int
    right: int


@dataclass(frozen=True)
class DecompositionPlan:
    distribution: Distribution
    neighbors: tuple[Neighbors, ...]
    y_periodic: bool
    halo_width: int = 1

    @property
    def n_workers(self) -> int:
        return self.distribution.n_workers

    def extent(self, worker: int) -> tuple[int, int, int, int]:
        return self.distribution.block(worker)


def decompose(grid: GridSpec, n_workers: int, mode: str = ROWS, y_periodic: bool = False) -> DecompositionPlan:
    """Split the grid into row bands or patches and wire up nearest neighbours.

    ``x`` always wraps.  ``y`` wraps only when ``y_periodic``; otherwise the
    bottom band has no ``down`` and the top band no ``up`` neighbour.
    """
    if n_workers < 1:
        raise ValueError("need at least one worker")
    pr, pc = (n_workers, 1) if mode == ROWS else patch_factors(n_workers)
    if mode not in (ROWS, PATCHES):
        raise ValueError(f"unknown decomposition mode {mode!r}")
    try:
        dist = (
            Distribution.blocked_rows(grid.shape, n_workers)
            if mode == ROWS
            else Distribution.blocked_patches(grid.shape, pr, pc)
        )
    except IncompatibleDistribution as exc:
        raise TooManyWorkers(str(exc)) from None

    nbrs = []
    for w in range(n_workers):
        r, c = divmod(w, pc)
        down = (r - 1) % pr if (r > 0 or y_periodic) else None
        up = (r + 1) % pr if (r < pr - 1 or y_periodic) else None
        nbrs.append(
            Neighbors(
                down=None if down is None else down * pc + c,
                up=None if up is None else up * pc + c,
                left=r * pc + (c - 1) % pc,
                right=r * pc + (c + 1) % pc,
            )
        )
    return DecompositionPlan(dist, tuple(nbrs), y_periodic)
