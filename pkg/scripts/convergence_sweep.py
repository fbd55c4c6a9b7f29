#!/usr/bin/env python3
"""Wedge-flow convergence sweep: L1 gap to the zero-limit run vs tau."""

import argparse
import os

from hyperwedge.experiments import ExperimentConfig, run_convergence, write_rate_csv
from hyperwedge.tracking import EngineConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--taus", default="0.1,0.05,0.025",
                    help="comma-separated scaling grid")
    ap.add_argument("--angle", type=float, default=0.01, help="wedge slope")
    ap.add_argument("--amp", type=float, default=1e-3,
                    help="inflow perturbation amplitude")
    ap.add_argument("--nu", type=int, default=10)
    ap.add_argument("--h", type=float, default=1.0 / 32.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--x", type=float, default=1.0, help="measurement station")
    ap.add_argument("--out", default="results/convergence")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        scenario="wedge",
        tau_grid=tuple(float(t) for t in args.taus.split(",")),
        wedge_angle=args.angle,
        data_amplitude=args.amp,
        x_station=args.x,
        engine=EngineConfig(nu=args.nu, h=args.h, seed=args.seed,
                            x_end=max(args.x, 1.0)),
    )
    fit = run_convergence(cfg)

    print(f"{'tau':>8}  {'E':>13}  {'E/(eps x tau^2)':>16}")
    for tau, err, coeff in zip(fit.taus, fit.errors, fit.coefficients):
        print(f"{tau:8.4f}  {err:13.6e}  {coeff:16.6f}")
    print(f"fitted slope: {fit.slope:.4f}")

    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "rate.csv")
    write_rate_csv(fit, path)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
