"""Exact branch-identification success against the fidelity lower bound, per preamble length m.

Usage: python3 scripts/branch_identification.py [--p 0.2 0.5] [--gammas 0.5 0.5] [--m-max 40] [--delta 0.05]
"""
import argparse
import csv
import sys

import numpy as np

from qmemcap.channels import BranchMixture, depolarizing
from qmemcap.discrimination import branch_id_success, lemma_bound, preamble_builder, select_m


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=float, nargs="+", default=[0.2, 0.5])
    ap.add_argument("--gammas", type=float, nargs="+")
    ap.add_argument("--m-max", type=int, default=40)
    ap.add_argument("--delta", type=float, default=0.05)
    args = ap.parse_args()
    gammas = np.array(args.gammas or [1.0 / len(args.p)] * len(args.p))
    mix = BranchMixture(gammas, tuple(depolarizing(p) for p in args.p))
    builder = preamble_builder(mix)
    w = csv.writer(sys.stdout)
    w.writerow(["m", "branch", "exact_success", "lemma_bound", "f"])
    for m in range(1, args.m_max + 1):
        pre = builder(m)
        for i, s in enumerate(branch_id_success(pre)):
            w.writerow([m, i, repr(float(s)), repr(lemma_bound(pre.f, m, gammas[i], mix.M)), repr(pre.f)])
    m_star = select_m(builder, args.delta, 10_000)
    print(f"# select_m(delta={args.delta}) = {m_star}", file=sys.stderr)


if __name__ == "__main__":
    main()
