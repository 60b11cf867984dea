#!/usr/bin/env python3
"""Spatial population for the simulated SIR example: n individuals placed
uniformly on a 15 x 30 area with a Gamma(1, 1) risk factor."""

import argparse
import csv

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--seed", type=int, default=11235)
    ap.add_argument("--out", default="data/sir_population.csv")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    x = rng.uniform(0.0, 15.0, args.n)
    y = rng.uniform(0.0, 30.0, args.n)
    rf = rng.gamma(1.0, 1.0, args.n)

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "riskfactor1"])
        for row in zip(x, y, rf):
            w.writerow([repr(float(v)) for v in row])


if __name__ == "__main__":
    main()
