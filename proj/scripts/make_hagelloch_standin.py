#!/usr/bin/env python3
"""Synthetic stand-in for the 1861 Hagelloch measles data.

The original records are not bundled. This script builds a village of 188
children with the same layout (home coordinates in metres, school class,
household), simulates an SEIR outbreak with the tnilm binary using values
close to published estimates for the original outbreak, observes it with
uniform delays, and appends one isolated case well after the main outbreak.

Outputs (under --out):
  risk_factors.csv                   x, y, age, class, household
  distance.csv                       pairwise home distance, inf for a shared home
  same_class.csv, same_household.csv 0/1 indicators
  observations.csv                   observed infection and removal times
  truth/                             the simulated events and network
"""

import argparse
import csv
import json
import os
import shutil
import subprocess
import sys
import tempfile

import numpy as np

N = 188
ISOLATED = 141  # 1-based id of the late case
LATE_GAP = 25.0  # days between the last removal observation and the late case


def write_matrix(path, m):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in m:
            w.writerow(["inf" if np.isinf(v) else repr(float(v)) for v in row])


def build_village(rng):
    sizes = []
    while sum(sizes) < N:
        sizes.append(int(rng.choice([1, 2, 3, 4, 5, 6], p=[0.12, 0.2, 0.26, 0.22, 0.13, 0.07])))
    sizes[-1] -= sum(sizes) - N
    if sizes[-1] == 0:
        sizes.pop()
    homes = np.column_stack([rng.uniform(0.0, 250.0, len(sizes)), rng.uniform(0.0, 150.0, len(sizes))])

    rows = []
    for h, size in enumerate(sizes):
        for _ in range(size):
            age = int(rng.integers(1, 15))
            klass = 0 if age < 6 else (1 if age < 10 else 2)
            rows.append((homes[h, 0], homes[h, 1], age, klass, h + 1))
    order = rng.permutation(len(rows))
    return [rows[i] for i in order]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--tnilm", default="build/tools/tnilm")
    ap.add_argument("--out", default="data/hagelloch")
    ap.add_argument("--seed", type=int, default=4321)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    os.makedirs(args.out, exist_ok=True)
    rows = build_village(rng)

    with open(os.path.join(args.out, "risk_factors.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "age", "class", "household"])
        for x, y, age, klass, house in rows:
            w.writerow([repr(float(x)), repr(float(y)), age, klass, house])

    xy = np.array([[r[0], r[1]] for r in rows])
    klass = np.array([r[3] for r in rows])
    house = np.array([r[4] for r in rows])
    d = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2))
    d[d == 0.0] = np.inf
    same_class = ((klass[:, None] == klass[None, :]) & (klass[:, None] > 0)).astype(float)
    same_house = (house[:, None] == house[None, :]).astype(float)
    write_matrix(os.path.join(args.out, "distance.csv"), d)
    write_matrix(os.path.join(args.out, "same_class.csv"), same_class)
    write_matrix(os.path.join(args.out, "same_household.csv"), same_house)

    data = os.path.abspath(args.out)
    config = {
        "seed": args.seed,
        "population": {
            "risks": os.path.join(data, "risk_factors.csv"),
            "distances": [
                {"matrix": os.path.join(data, "distance.csv")},
                {"matrix": os.path.join(data, "same_class.csv")},
                {"matrix": os.path.join(data, "same_household.csv")},
            ],
        },
        "model": {
            "class": "SEIR",
            "functions": {
                "sparks": "theta[1]",
                "susceptibility": "1",
                "infectivity": "theta[1]*dist(k,i,1)^(-theta[2]) + theta[3]*dist(k,i,2) + theta[4]*dist(k,i,3)",
                "transmissibility": "1",
                "latency": "theta[1]",
                "removal": "theta[1]",
            },
            "parameters": {
                "sparks": [0.00126],
                "infectivity": [4.1, 1.96, 0.02, 0.195],
                "latency": [0.126],
                "removal": [0.121],
            },
        },
        # The late case is held out of the outbreak and added afterwards.
        "simulate": {
            "starting_states": {"default": "S", "R": [ISOLATED]},
            "tmax": 365.0,
            "observe": {
                "infection_delay": {"family": "uniform", "a": 0.0, "b": 3.0},
                "removal_delay": {"family": "uniform", "a": 0.0, "b": 2.0},
                "force": True,
            },
        },
    }
    with tempfile.TemporaryDirectory() as tmp:
        cfg_path = os.path.join(tmp, "generate.json")
        with open(cfg_path, "w") as fh:
            json.dump(config, fh, indent=2)
        sim_out = os.path.join(tmp, "sim")
        subprocess.run([args.tnilm, "simulate", cfg_path, "--output", sim_out], check=True)
        truth = os.path.join(args.out, "truth")
        os.makedirs(truth, exist_ok=True)
        for name in ("events.csv", "network.csv", "trajectory.csv"):
            shutil.copy(os.path.join(sim_out, name), os.path.join(truth, name))
        with open(os.path.join(sim_out, "observations.csv")) as fh:
            obs = list(csv.DictReader(fh))

    removals = [float(r["removal"]) for r in obs if r["removal"]]
    infections = [float(r["infection"]) for r in obs if r["infection"]]
    if len(infections) < 100:
        sys.exit(f"outbreak too small ({len(infections)} cases); try another --seed")
    late = max(removals) + LATE_GAP
    obs[ISOLATED - 1]["infection"] = repr(late)
    obs[ISOLATED - 1]["removal"] = repr(late + 6.0)

    with open(os.path.join(args.out, "observations.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["individual", "infection", "removal"])
        w.writeheader()
        w.writerows(obs)
    print(f"{len(infections) + 1} cases, first observed at {min(infections):.2f}, late case at {late:.2f}")


if __name__ == "__main__":
    main()
