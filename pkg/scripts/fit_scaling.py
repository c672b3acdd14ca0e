"""Fit power and logarithmic models to mean age vs n from a scaling results CSV.

    python scripts/fit_scaling.py results/scaling/results.csv
"""

import sys
from collections import defaultdict

from agelab.experiments import results_table
from agelab.metrics import fit_scaling


def main(path):
    rows = [r for r in results_table(path) if r["metric"] == "mean_age" and r["scope"] == "network"]
    groups = defaultdict(lambda: defaultdict(list))
    for r in rows:
        label = r.get("topology", "") + (f" q_in={r['q_in']}" if "q_in" in r else "")
        groups[label][int(r["n"])].append(float(r["value"]))
    for label, by_n in sorted(groups.items()):
        pts = [(n, sum(v) / len(v)) for n, v in sorted(by_n.items())]
        fit = fit_scaling(pts)
        print(f"{label or 'all':30s} model={fit.model:11s} b={fit.exponent:.3f} "
              f"R2(power)={fit.r2_power:.4f} R2(log)={fit.r2_log:.4f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "results/scaling/results.csv")
