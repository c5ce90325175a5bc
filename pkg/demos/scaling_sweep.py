"""Small strong- and weak-scaling sweep, written out as CSV plus gnuplot scripts.

Threads stand in for network ranks, so the numbers show how the strategies
behave under this runtime rather than on a cluster.  Expect speedups only
when the machine has several physical cores.
"""

import os
from pathlib import Path

from pgas_euler import bench_harness as bh

out = Path("scaling_out")
out.mkdir(exist_ok=True)
counts = tuple(c for c in (1, 2, 4, 8) if c <= max(os.cpu_count() or 1, 2))
strategies = ("two_sided_row", "shared_barrier", "one_sided_patch")

strong = bh.BenchPlan.strong_default(strategies=strategies, worker_counts=counts,
                                     nx=128, ny=256, t_final=2e-4, repetitions=3)
weak = bh.BenchPlan.weak_default(strategies=strategies, worker_counts=tuple(c for c in (1, 4) if c in counts),
                                 t_final=2e-4, repetitions=3)

for plan, run in ((strong, bh.run_strong_scaling), (weak, bh.run_weak_scaling)):
    rows = bh.summarize(run(plan))
    bh.export_report(rows, "csv", out / f"{plan.mode}.csv", plan.mode)
    bh.export_report(rows, "plotscript", out / f"{plan.mode}.gp", plan.mode)
    print(f"-- {plan.mode} --")
    for r in rows:
        print(f"{r.strategy:18s} {r.workers:3d} {r.nx}x{r.ny}  {r.label}")
print(f"reports in {out}/")
