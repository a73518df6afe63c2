"""Dense sparsity sweep over plane depth and tilt, with heatmaps.

Run:
    python3 scripts/run_sparsity_sweep.py --scene B --out out/sweep_b

Defaults reproduce the full-resolution study (40x40 grid, 256x256 EPIs);
pass --coarse for the 20x20 grid the acceptance checks use. Writes
sparsity.csv, plane_mae.csv, and one heatmap per metric.
"""

import argparse
from pathlib import Path

import numpy as np

from epifield.config import load_preset
from epifield.experiments import sweep_plane_mae, sweep_sparsity
from epifield.fileio import write_heatmap_pgm, write_sweep_csv


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scene", default="A", help="preset name (A, B, or C)")
    p.add_argument("--out", default="out/sparsity_sweep", help="output directory")
    p.add_argument("--grid", type=int, default=40, help="cells per sweep axis")
    p.add_argument("--coarse", action="store_true", help="use the 20x20 grid")
    p.add_argument("--depth-min", type=float, default=1.0)
    p.add_argument("--depth-max", type=float, default=2.0)
    p.add_argument("--tilt-max", type=float, default=34.0)
    p.add_argument("--keep", type=float, default=0.01, help="coefficient fraction kept")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=8)
    return p.parse_args()


def main():
    args = parse_args()
    n = 20 if args.coarse else args.grid
    scene = load_preset(args.scene)
    d_values = np.linspace(args.depth_min, args.depth_max, n)
    tilt_values = np.linspace(0.0, args.tilt_max, n)

    sparsity = sweep_sparsity(
        scene,
        d_values,
        tilt_values,
        keep_fraction=args.keep,
        seed=args.seed,
        threads=args.threads,
    )
    mae = sweep_plane_mae(scene.surface, d_values, tilt_values)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(sparsity, out / "sparsity.csv")
    write_sweep_csv(mae, out / "plane_mae.csv")
    write_heatmap_pgm(sparsity.metric, out / "sparsity_heatmap.pgm")
    write_heatmap_pgm(mae.metric, out / "plane_mae_heatmap.pgm")

    for result in (sparsity, mae):
        i, j = result.argopt
        print(
            f"{result.metric_kind} argmin: depth={result.d_values[i]:.6g} "
            f"tilt={result.tilt_values[j]:.6g} deg value={result.metric[i, j]:.6g}"
        )
    if sparsity.missing:
        print(f"skipped {len(sparsity.missing)} invalid cells")


if __name__ == "__main__":
    main()
