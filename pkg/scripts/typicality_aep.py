"""Typical-subspace mass and log-dimension as n grows, for a qubit spectrum.

Usage: python3 scripts/typicality_aep.py [--spectrum 0.75 0.25] [--epsilon 0.1] [--n 10 50 100 300 1000 2000]
"""
import argparse
import csv
import sys

import numpy as np

from qmemcap.typicality import average_typical


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--spectrum", type=float, nargs="+", default=[0.75, 0.25])
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--n", type=int, nargs="+", default=[10, 50, 100, 300, 1000, 2000])
    args = ap.parse_args()
    sigma = np.diag(args.spectrum)
    w = csv.writer(sys.stdout)
    w.writerow(["n", "epsilon", "mass", "log2_dim", "bound"])
    for n in args.n:
        r = average_typical(sigma, n, args.epsilon)
        w.writerow([n, args.epsilon, repr(r.probability_mass), repr(r.log2_dimension), repr(r.dimension_bound)])


if __name__ == "__main__":
    main()
