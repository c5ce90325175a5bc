"""Blast wave over a dense hill and a light basin.

Runs the default problem on a modest grid, writes density snapshots as PNGs
(log scale) and prints how far the front has travelled at each one.

    python demos/blast_snapshots.py --grid 256 --out blast_png
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pgas_euler.euler_core import BoundarySpec, GridSpec, init_sedov
from pgas_euler.strategies import StrategyId, run_detailed


def front_radius(field, threshold=1.0):
    """Distance from the centre to the farthest cell whose pressure rose above ``threshold``."""
    g = field.grid
    y, x = np.mgrid[0 : g.ny, 0 : g.nx]
    r = np.hypot((x + 0.5) * g.dx - 0.5, (y + 0.5) * g.dy - 0.5)
    hot = field.data[..., 3] > threshold
    return float(r[hot].max()) if hot.any() else 0.0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=256)
    ap.add_argument("--steps", type=int, default=1500)
    ap.add_argument("--every", type=int, default=500)
    ap.add_argument("--out", default="blast_png")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(exist_ok=True)
    field0 = init_sedov(GridSpec(args.grid, args.grid))
    snaps = range(0, args.steps + 1, args.every)
    res = run_detailed(StrategyId.SEQUENTIAL, field0, args.steps, BoundarySpec(), 1,
                       dt=1e-5, snapshot_steps=snaps)
    print(f"{args.steps} steps on {args.grid}^2 in {res.wall_seconds:.1f} s")

    for step, f in res.snapshots:
        t = step * 1e-5
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.imshow(np.log10(f.data[..., 0]), origin="lower", extent=(0, 1, 0, 1), cmap="viridis")
        ax.set_title(f"log10 rho, t = {t:.3f}")
        fig.savefig(out / f"rho_{step:06d}.png", dpi=100)
        plt.close(fig)
        print(f"t={t:.3f}  front r={front_radius(f):.4f}  rho in [{f.data[..., 0].min():.3g}, {f.data[..., 0].max():.3g}]")


if __name__ == "__main__":
    main()
