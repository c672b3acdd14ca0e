"""SVG figures from results CSVs."""

from __future__ import annotations

import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PLOT_KINDS = {
    # kind: (x column, metric, log x, log y, y limits)
    "age_vs_n": ("n", "mean_age", True, True, None),
    "f_vs_rate": ("gossip_rate", "fraction_accurate", True, False, (0.0, 1.0)),
}


def emit_plot(csv_path, kind: str, out_path, x: str | None = None) -> None:
    """Mean metric against ``x`` (averaged over replications), one line per
    combination of the remaining grid columns."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {sorted(PLOT_KINDS)}")
    x_col, metric, logx, logy, ylim = PLOT_KINDS[kind]
    x_col = x or x_col
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        rows = [r for r in reader if r.get("metric") == metric and r.get("scope") == "network"]
    required = {x_col, "replication", "metric", "value", "scope"}
    if not required <= set(header):
        raise ValueError(f"{csv_path} lacks columns {sorted(required - set(header))} for {kind}")
    if not rows:
        raise ValueError(f"{csv_path} has no '{metric}' rows to plot")

    fixed = {"experiment", "cell", x_col, "replication", "seed", "scope", "metric", "value"}
    series_cols = [c for c in header if c not in fixed]
    series: dict[tuple, dict[float, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in rows:
        key = tuple(r[c] for c in series_cols)
        series[key][float(r[x_col])].append(float(r["value"]))

    fig, ax = plt.subplots(figsize=(5, 3.6))
    for key, pts in sorted(series.items()):
        xs = sorted(pts)
        ys = [sum(pts[v]) / len(pts[v]) for v in xs]
        label = ", ".join(f"{c}={v}" for c, v in zip(series_cols, key)) or metric
        ax.plot(xs, ys, marker="o", label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    if ylim:
        ax.set_ylim(*ylim)
    ax.set_xlabel(x_col)
    ax.set_ylabel(metric)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
