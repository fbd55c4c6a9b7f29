#!/usr/bin/env python3
"""Paired perturbed runs: L1 output change per unit of input change."""

import argparse
import os

from hyperwedge.experiments import (ExperimentConfig, run_stability,
                                    write_stability_csv)
from hyperwedge.tracking import EngineConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau", type=float, default=0.1)
    ap.add_argument("--angle", type=float, default=0.01, help="wedge slope")
    ap.add_argument("--amp", type=float, default=1e-3,
                    help="inflow perturbation amplitude")
    ap.add_argument("--data-delta", type=float, default=1e-3,
                    help="inflow state perturbation")
    ap.add_argument("--wall-delta", type=float, default=1e-3,
                    help="wall slope perturbation")
    ap.add_argument("--nu", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/stability")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        scenario="stability",
        tau_grid=(args.tau,),
        wedge_angle=args.angle,
        data_amplitude=args.amp,
        data_perturbation=args.data_delta,
        boundary_perturbation=args.wall_delta,
        engine=EngineConfig(nu=args.nu, seed=args.seed),
    )
    rep = run_stability(cfg)

    print(f"{'case':<10}  {'input delta':>13}  {'output delta':>13}  {'ratio':>8}")
    for row in rep.rows:
        print(f"{row.case:<10}  {row.input_delta:13.6e}  "
              f"{row.output_delta:13.6e}  {row.ratio:8.3f}")
    print(f"max ratio: {rep.max_ratio:.3f}")

    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "stability.csv")
    write_stability_csv(rep, path)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
