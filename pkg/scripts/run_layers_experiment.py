"""Layered reconstruction study: fitted tilted planes vs parallel planes.

Run:
    python3 scripts/run_layers_experiment.py --scene C --out out/layers_c

One dense directional capture per run; every (layer count, factor) cell
reconstructs from the subsampled rows under both plane families. Writes
per-family RMSE tables and the minimum-sampling curve. Full scale
(n_s=1024, factors up to 512) takes a few minutes.
"""

import argparse
from pathlib import Path

from epifield.config import load_preset
from epifield.experiments import layers_experiment
from epifield.fileio import write_curve_csv, write_layers_rmse_csv

FACTORS = (2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256, 512)


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scene", default="C", help="preset name (A, B, or C)")
    p.add_argument("--out", default="out/layers")
    p.add_argument(
        "--layers", type=int, nargs="+", default=[1, 2, 4, 8, 16], help="layer counts"
    )
    p.add_argument(
        "--factors", type=int, nargs="+", default=list(FACTORS), help="subsampling factors"
    )
    p.add_argument("--n-s", type=int, default=1024, help="camera rows in the capture")
    p.add_argument("--n-u", type=int, default=512, help="image columns")
    p.add_argument("--seed", type=int, default=0)
    return p.parse_args()


def main():
    args = parse_args()
    scene = load_preset(args.scene)
    result = layers_experiment(
        scene,
        tuple(args.layers),
        tuple(args.factors),
        n_s=args.n_s,
        n_u=args.n_u,
        seed=args.seed,
    )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_layers_rmse_csv(result, "parallel", out / "layers_rmse_parallel.csv")
    write_layers_rmse_csv(result, "tilted", out / "layers_rmse_tilted.csv")
    write_curve_csv(result.curve, out / "sampling_curve.csv")

    curve = result.curve
    for idx, count in enumerate(curve.layer_counts):
        print(
            f"L={count}: images parallel={curve.images_parallel[idx]} "
            f"tilted={curve.images_tilted[idx]}"
        )


if __name__ == "__main__":
    main()
