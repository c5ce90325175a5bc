"""Finite-volume 2D Euler solver with interchangeable parallel communication strategies."""

from . import bench_harness, comm_runtime, euler_core, strategies
from .strategies import StrategyId, run_simulation

__version__ = "0.1.0"
