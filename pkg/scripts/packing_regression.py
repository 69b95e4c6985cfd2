"""Greedy packing counts for small block lengths, with the code invariants checked on each.

Prints one row per (channel, n, width). The counts for depolarizing p=0.1 at
n=8, epsilon=0.2 are pinned in the acceptance suite.

Usage: python3 scripts/packing_regression.py [--n 4 6 8] [--widths 0.0667 0.6]
"""
import argparse
import csv
import sys
import time

import numpy as np

from qmemcap.channels import Ensemble, basis_state, depolarizing
from qmemcap.coding import PackingConfig, evaluate_error, pack_memoryless, povm_violation


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=float, default=0.1)
    ap.add_argument("--epsilon", type=float, default=0.2)
    ap.add_argument("--n", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--widths", type=float, nargs="+", help="typical widths; default is epsilon/3 and 0.6")
    args = ap.parse_args()
    widths = args.widths or [None, 0.6]
    ens = Ensemble(np.array([0.5, 0.5]), (basis_state(0), basis_state(1)))
    ch = depolarizing(args.p)
    w = csv.writer(sys.stdout)
    w.writerow(["p", "n", "epsilon", "width", "N", "rate", "p_e", "povm_violation", "seconds"])
    for n in args.n:
        for width in widths:
            t = time.perf_counter()
            code = pack_memoryless(ch, PackingConfig(ens, n, args.epsilon, typical_width=width))
            pe = evaluate_error(code, ch) if code.N else float("nan")
            w.writerow([args.p, n, args.epsilon, "eps/3" if width is None else width, code.N,
                        f"{code.rate:.4f}", f"{pe:.6f}", f"{povm_violation(code):.1e}",
                        f"{time.perf_counter() - t:.1f}"])


if __name__ == "__main__":
    main()
