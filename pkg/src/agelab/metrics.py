"""Age bookkeeping and the statistics layered on top of simulation output."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np


@dataclass
class MetricsAccumulator:
    """Exact time integrals over the window ``[window_start, window_end]``.

    Node integrals are settled lazily: only when a node's packet changes (or at
    the end of the run) is the elapsed piece of its sawtooth added.
    """

    n: int
    window_start: float
    window_end: float
    age_int: np.ndarray = field(init=False)
    ver_int: np.ndarray = field(init=False)
    acc_int: np.ndarray = field(init=False)
    last: np.ndarray = field(init=False)
    # [integral of source version, last settle time]
    src_int: np.ndarray = field(init=False)

    def __post_init__(self):
        self.age_int = np.zeros(self.n)
        self.ver_int = np.zeros(self.n)
        self.acc_int = np.zeros(self.n)
        self.last = np.zeros(self.n)
        self.src_int = np.zeros(2)

    @property
    def span(self) -> float:
        return self.window_end - self.window_start

    def settle(self, i: int, t: float, gen: float, version: int, accurate: bool) -> None:
        a0 = max(self.last[i], self.window_start)
        a1 = min(t, self.window_end)
        if a1 > a0:
            d = a1 - a0
            self.age_int[i] += (a0 - gen) * d + 0.5 * d * d
            self.ver_int[i] += version * d
            if accurate:
                self.acc_int[i] += d
        self.last[i] = t

    def settle_source(self, t: float, version: int) -> None:
        a0 = max(self.src_int[1], self.window_start)
        a1 = min(t, self.window_end)
        if a1 > a0:
            self.src_int[0] += version * (a1 - a0)
        self.src_int[1] = t

    def mean_age(self) -> np.ndarray:
        return self.age_int / self.span

    def mean_version_age(self) -> np.ndarray:
        return (self.src_int[0] - self.ver_int) / self.span


@dataclass(frozen=True)
class MetricsReport:
    """Time averages over the measurement window of one run."""

    mode: str
    n: int
    span: float
    events: int
    mean_age: tuple[float, ...]
    version_age: tuple[float, ...] | None = None
    fraction_accurate: float | None = None
    accurate_time: tuple[float, ...] | None = None

    @property
    def network_age(self) -> float:
        """Mean over nodes of each node's time-average true age."""
        return float(np.mean(self.mean_age))

    @property
    def network_version_age(self) -> float:
        if self.version_age is None:
            raise ValueError("version age is only tracked in version mode")
        return float(np.mean(self.version_age))


def integrate_age(holdings, start: float, end: float) -> float:
    """Time-average age of a piecewise holding record.

    ``holdings`` is a sequence of ``(t0, t1, gen_time)``: the packet generated
    at ``gen_time`` was held over ``[t0, t1]``. Intervals must tile
    ``[start, end]`` exactly.
    """
    if end <= start:
        raise ValueError("empty measurement span")
    cursor = start
    area = 0.0
    for t0, t1, gen in sorted(holdings):
        if t0 != cursor:
            raise ValueError(f"holdings leave a gap or overlap at t={cursor}")
        if t1 < t0 or gen > t0:
            raise ValueError(f"invalid holding ({t0}, {t1}, {gen})")
        d = t1 - t0
        area += (t0 - gen) * d + 0.5 * d * d
        cursor = t1
    if cursor != end:
        raise ValueError(f"holdings stop at t={cursor}, before {end}")
    return area / (end - start)


def fraction_accurate(acc: MetricsAccumulator, n: int, mode: str = "version") -> float:
    if mode != "version":
        raise ValueError("fraction accurate is only defined for version-mode runs")
    return float(np.sum(acc.acc_int) / (n * acc.span))


def _r2(y: np.ndarray, fitted: np.ndarray) -> float:
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - fitted) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return min(1.0, max(0.0, 1.0 - ss_res / ss_tot))


@dataclass(frozen=True)
class ScalingFit:
    model: str
    exponent: float
    power_prefactor: float
    r2_power: float
    log_coefficient: float
    log_intercept: float
    r2_log: float
    points: tuple[tuple[float, float], ...]

    @property
    def r2(self) -> float:
        return self.r2_power if self.model == "power_law" else self.r2_log


def fit_scaling(points) -> ScalingFit:
    """Fit ``value ~ A n^b`` (log-log least squares) and ``value ~ c ln n + d``.

    The model with the larger R^2 (each on its own fitted transform) is selected;
    ties go to the power law.
    """
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit a scaling law")
    ns = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(np.diff(ns) <= 0):
        raise ValueError("n must be strictly increasing")
    if np.any(vs <= 0) or np.any(ns <= 0):
        raise ValueError("scaling fits need positive n and values")

    x = np.log(ns)
    ly = np.log(vs)
    b, log_a = np.polyfit(x, ly, 1)
    r2_pow = _r2(ly, b * x + log_a)
    c, d = np.polyfit(x, vs, 1)
    r2_log = _r2(vs, c * x + d)
    model = "logarithmic" if r2_log > r2_pow else "power_law"
    return ScalingFit(model, float(b), float(math.exp(log_a)), r2_pow,
                      float(c), float(d), r2_log, tuple(pts))


def _z(confidence: float) -> float:
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    return NormalDist().inv_cdf(0.5 + confidence / 2.0)


def mean_ci(samples, confidence: float = 0.95) -> tuple[float, float]:
    """Sample mean and normal-approximation half-width."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        return float(x.mean()), math.inf
    return float(x.mean()), _z(confidence) * float(x.std(ddof=1)) / math.sqrt(x.size)


def difference_interval(samples_a, samples_b, confidence: float = 0.95) -> tuple[float, float]:
    a = np.asarray(samples_a, dtype=float)
    b = np.asarray(samples_b, dtype=float)
    diff = float(a.mean() - b.mean())
    se = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
    half = _z(confidence) * se
    return diff - half, diff + half


def compare_with_ci(samples_a, samples_b, confidence: float = 0.95) -> str:
    """``'a_less'``, ``'b_less'`` or ``'inconclusive'`` for the mean difference."""
    if len(samples_a) < 5 or len(samples_b) < 5:
        raise ValueError("need at least 5 samples on each side")
    lo, hi = difference_interval(samples_a, samples_b, confidence)
    if hi < 0:
        return "a_less"
    if lo > 0:
        return "b_less"
    return "inconclusive"


@dataclass(frozen=True)
class AgeProfile:
    distances: tuple[int, ...]
    means: tuple[float, ...]
    half_widths: tuple[float, ...]
    monotone: bool


def _is_path(topology) -> bool:
    """True iff the user graph is the path 0-1-...-(n-1)."""
    want = {(i, i + 1) for i in range(topology.n - 1)}
    return topology.links() == want


def age_profile(topology, node_ages, confidence: float = 0.95) -> AgeProfile:
    """Fold per-node ages of a line by distance from its centre.

    ``node_ages`` has shape ``(replications, m)``. The verdict is true iff every
    step outward does not decrease by more than the CI of the difference.
    """
    if not _is_path(topology):
        raise ValueError("age profiles need a line topology 0-1-...-(m-1)")
    ages = np.atleast_2d(np.asarray(node_ages, dtype=float))
    m = topology.n
    if ages.shape[1] != m:
        raise ValueError("one column per line position expected")
    pos = np.arange(m)
    # even m has two centre positions
    dist = np.minimum(np.abs(pos - (m - 1) // 2), np.abs(pos - m // 2))
    distances = sorted(set(dist.tolist()))
    folded = np.stack([ages[:, dist == k].mean(axis=1) for k in distances], axis=1)

    means, halves = [], []
    for col in folded.T:
        mu, h = mean_ci(col, confidence)
        means.append(mu)
        halves.append(h)
    monotone = True
    for k in range(len(distances) - 1):
        diff = folded[:, k + 1] - folded[:, k]
        mu, h = mean_ci(diff, confidence)
        if mu + h < 0:
            monotone = False
    return AgeProfile(tuple(distances), tuple(means), tuple(halves), monotone)


CSV_COLUMNS = ("n", "replication", "scope", "metric", "value")


def format_value(x: float) -> str:
    return f"{x:.9g}"


def write_metrics_csv(path, rows) -> None:
    """Rows of ``(n, replication, scope, metric, value)``; scope is a node id or
    ``'network'``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for n, rep, scope, metric, value in rows:
            w.writerow([n, rep, scope, metric, format_value(value)])
