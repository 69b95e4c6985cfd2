"""Holevo capacity of the qubit depolarizing channel over a grid of p, next to its closed form.

Usage: python3 scripts/capacity_sweep.py [--points 11] [--seed 0]
"""
import argparse
import csv
import math
import sys

import numpy as np

from qmemcap.capacity import OptimizerConfig, holevo_capacity
from qmemcap.channels import binary_entropy, depolarizing


def closed_form(p):
    # pure input, eigenvalues of the output are 1 - p/2 and p/2
    return 1.0 - binary_entropy(p / 2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=11)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    w = csv.writer(sys.stdout)
    w.writerow(["p", "capacity", "closed_form", "abs_gap", "iterations"])
    for p in np.linspace(0.0, 1.0, args.points):
        res = holevo_capacity(depolarizing(float(p)), OptimizerConfig(seed=args.seed))
        ref = closed_form(float(p))
        w.writerow([f"{p:.4f}", repr(res.value), repr(ref), f"{abs(res.value - ref):.2e}", res.iterations])


if __name__ == "__main__":
    main()
