"""Parallel drivers: row/patch decomposition and the communication strategies."""

from .decompose import PATCHES, ROWS, DecompositionPlan, Neighbors, TooManyWorkers, decompose, patch_factors
from .drivers import (
    CFLViolation,
    RunResult,
    StrategyId,
    barrier_count,
    decomposition_mode,
    run_detailed,
    run_simulation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
