"""Fraction of nodes holding accurate content as the gossip and source rates vary.

Prints mean F (with a 95% interval) per rate for the reference configuration
n=32, p=0.3, version rate 1, and writes an F-vs-rate plot.
"""

import argparse

import numpy as np

from agelab.acceptance import MUTATION_N, MUTATION_P, mutation_f
from agelab.metrics import mean_ci


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--n", type=int, default=MUTATION_N)
    ap.add_argument("--p", type=float, default=MUTATION_P)
    ap.add_argument("--version-rate", type=float, default=1.0)
    args = ap.parse_args()
    rates = np.logspace(-1, 1, 7)
    for which in ("gossip_rate", "source_rate"):
        print(which)
        for r in rates:
            f = mutation_f(n=args.n, p_mut=args.p, version_rate=args.version_rate,
                           reps=args.reps, **{which: float(r)})
            m, h = mean_ci(f)
            print(f"  {r:7.3f}  F={m:.3f} +- {h:.3f}")


if __name__ == "__main__":
    main()
