"""Static transmitter-interferer game over peak age of information.

The transmitter picks power ``p``, the interferer power ``q``. Service rate is
``mu = k * SINR`` (``rate_model='linear'``) or ``k * log(1 + SINR)`` (``'log'``)
with ``SINR = p / (q + N)``. Utilities::

    U_T = -A(p, q) - c_T * p
    U_I = +A(p, q) - c_I * q

where ``A = 1/lam + 2/mu`` is the M/G/1/1 peak age (``objective='peak'``). The
``'average'`` objective subtracts ``1/(lam + mu)``, which couples the arrival
rate into the equilibrium; it is an exploration variant, solved numerically.

Closed forms for the linear/peak model at zero noise follow from the first-order
conditions: the transmitter's best response is ``p = sqrt(2 (q + N) / (k c_T))``
and ``U_I`` is affine in ``q`` with slope ``2/(k p) - c_I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

RATE_MODELS = ("linear", "log")
OBJECTIVES = ("peak", "average")


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class GameSpec:
    lam: float = 1.0
    k: float = 1.0
    noise: float = 0.0
    c_t: float = 1.0
    c_i: float = 1.0
    rate_model: str = "linear"
    objective: str = "peak"

    def __post_init__(self):
        if not (self.lam > 0 and self.k > 0 and self.c_t > 0 and self.c_i > 0):
            raise ValueError("lam, k, c_t and c_i must be positive")
        if self.noise < 0:
            raise ValueError("noise power must be non-negative")
        if self.rate_model not in RATE_MODELS or self.objective not in OBJECTIVES:
            raise ValueError("unknown rate model or objective")

    @property
    def closed_form(self) -> bool:
        return self.rate_model == "linear" and self.objective == "peak"


@dataclass(frozen=True)
class EquilibriumResult:
    kind: str
    p: float
    q: float
    u_t: float
    u_i: float
    exists: bool
    method: str
    note: str = ""
    nonunique: bool = False


def peak_age(lam: float, mu: float) -> float:
    if lam <= 0 or mu <= 0:
        raise ValueError("arrival and service rates must be positive")
    return 1.0 / lam + 2.0 / mu


def service_rate(p: float, q: float, noise: float, k: float, model: str = "linear") -> float:
    if p < 0 or q < 0 or noise < 0:
        raise ValueError("powers and noise must be non-negative")
    if q + noise == 0:
        if p > 0:
            raise ValueError("infinite SINR: no interference and no noise")
        return 0.0
    sinr = p / (q + noise)
    return k * sinr if model == "linear" else k * math.log1p(sinr)


def _inv_mu(spec: GameSpec, p, q):
    """1/mu, vectorised; +inf at p = 0 and 0 at infinite SINR."""
    p = np.asarray(p, dtype=float)
    x = np.asarray(q, dtype=float) + spec.noise
    with np.errstate(divide="ignore", invalid="ignore"):
        if spec.rate_model == "linear":
            out = x / (spec.k * p)
        else:
            out = 1.0 / (spec.k * np.log1p(p / x))
    out = np.where(p <= 0, np.inf, out)
    return np.where((x <= 0) & (p > 0), 0.0, out)


def age(spec: GameSpec, p, q):
    inv = _inv_mu(spec, p, q)
    a = 1.0 / spec.lam + 2.0 * inv
    if spec.objective == "average":
        with np.errstate(divide="ignore"):
            a = a - 1.0 / (spec.lam + 1.0 / inv)
    return a


def utilities(spec: GameSpec, p, q):
    a = age(spec, p, q)
    return -a - spec.c_t * np.asarray(p, float), a - spec.c_i * np.asarray(q, float)


def _dage_dmu(spec: GameSpec, mu: float) -> float:
    d = -2.0 / mu**2
    if spec.objective == "average":
        d += 1.0 / (spec.lam + mu) ** 2
    return d


def _dmu(spec: GameSpec, p: float, q: float) -> tuple[float, float]:
    """(d mu / d p, d mu / d q)."""
    x = q + spec.noise
    if spec.rate_model == "linear":
        return spec.k / x, -spec.k * p / x**2
    s = p / x
    return spec.k / ((1 + s) * x), -spec.k * s / ((1 + s) * x)


def _mu(spec: GameSpec, p: float, q: float) -> float:
    return service_rate(p, q, spec.noise, spec.k, spec.rate_model)


def _expand_root(f, lo: float, hi: float, what: str, grow: float = 2.0, tries: int = 200) -> float:
    """Root of a function positive at ``lo`` that turns negative somewhere above."""
    for _ in range(tries):
        if f(hi) < 0:
            return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        lo, hi = hi, hi * grow
    raise NonConvergence(f"no sign change while solving for {what}")


def transmitter_best_response(spec: GameSpec, q: float) -> float:
    if q + spec.noise <= 0:
        raise ValueError("transmitter best response is undefined without interference or noise")
    if spec.closed_form:
        return math.sqrt(2.0 * (q + spec.noise) / (spec.k * spec.c_t))

    def marginal(p):
        mu = _mu(spec, p, q)
        if mu == 0:
            return math.inf
        dp, _ = _dmu(spec, p, q)
        return -_dage_dmu(spec, mu) * dp - spec.c_t

    return _expand_root(marginal, 0.0, 1.0, "transmitter best response")


def _interferer_marginal(spec: GameSpec, p: float, q: float) -> float:
    _, dq = _dmu(spec, p, q)
    return _dage_dmu(spec, _mu(spec, p, q)) * dq - spec.c_i


def solve_ne(spec: GameSpec) -> EquilibriumResult:
    """Nash equilibrium: closed form for the linear/peak model at zero noise,
    otherwise the interferer's first-order condition along the transmitter's
    best-response curve."""
    if spec.closed_form and spec.noise == 0:
        p = 2.0 / (spec.k * spec.c_i)
        q = 2.0 * spec.c_t / (spec.k * spec.c_i**2)
        ut, ui = utilities(spec, p, q)
        return EquilibriumResult("NE", p, q, float(ut), float(ui), True, "closed_form")

    if spec.noise == 0:
        raise NonConvergence("numeric NE needs positive noise in the non-linear models")

    def g(q):
        return _interferer_marginal(spec, transmitter_best_response(spec, q), q)

    if g(0.0) <= 0:
        q = 0.0
    else:
        q = _expand_root(g, 0.0, 1.0, "interferer first-order condition")
    p = transmitter_best_response(spec, q)
    ut, ui = utilities(spec, p, q)
    # the first-order point is only an equilibrium if the interferer cannot
    # gain from a distant deviation (U_I need not be concave in q)
    scan = np.linspace(0.0, 4.0 * max(q, 1.0), 4001)
    gain = float(np.max(utilities(spec, p, scan)[1]) - ui)
    if gain > 1e-9:
        return EquilibriumResult("NE", p, q, float(ut), float(ui), False, "first_order_root",
                                 f"interferer gains {gain:.3g} by deviating; no pure NE found")
    return EquilibriumResult("NE", p, q, float(ut), float(ui), True, "first_order_root")


def _interferer_leader_payoff(spec: GameSpec, q: float) -> float:
    p = transmitter_best_response(spec, q)
    return float(utilities(spec, p, q)[1])


def solve_se(spec: GameSpec, leader: str) -> EquilibriumResult:
    """Stackelberg equilibrium with ``leader`` in ``{'interferer', 'transmitter'}``."""
    if leader == "interferer":
        return _se_interferer(spec)
    if leader == "transmitter":
        return _se_transmitter(spec)
    raise ValueError("leader must be 'interferer' or 'transmitter'")


def _se_interferer(spec: GameSpec) -> EquilibriumResult:
    kind = "SE_interferer_leader"
    if spec.closed_form and spec.noise == 0:
        q = spec.c_t / (2.0 * spec.k * spec.c_i**2)
        p = transmitter_best_response(spec, q)
        ut, ui = utilities(spec, p, q)
        return EquilibriumResult(kind, p, q, float(ut), float(ui), True, "closed_form")

    # coarse scan for local maxima, then bounded refinement from each
    q_hi = 4.0 * max(1.0, solve_ne(spec).q) if spec.noise > 0 else 10.0
    grid = np.linspace(0.0 if spec.noise > 0 else 1e-9, q_hi, 401)
    vals = np.array([_interferer_leader_payoff(spec, q) for q in grid])
    peaks = [i for i in range(len(grid))
             if (i == 0 or vals[i] >= vals[i - 1]) and (i == len(grid) - 1 or vals[i] >= vals[i + 1])]
    if peaks and peaks[-1] == len(grid) - 1:
        return EquilibriumResult(kind, math.nan, math.nan, math.nan, math.nan, False, "numeric",
                                 "leader payoff still increasing at the search bound")
    found = []
    for i in peaks:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        r = minimize_scalar(lambda q: -_interferer_leader_payoff(spec, q), bounds=(lo, hi),
                            method="bounded", options={"xatol": 1e-12})
        found.append((-r.fun, r.x))
    if spec.noise > 0:
        found.append((_interferer_leader_payoff(spec, 0.0), 0.0))
    found.sort(reverse=True)
    best_val, q = found[0]
    nonunique = any(abs(v - best_val) <= 1e-9 and abs(x - q) > 1e-6 for v, x in found[1:])
    p = transmitter_best_response(spec, q)
    ut, ui = utilities(spec, p, q)
    return EquilibriumResult(kind, p, q, float(ut), float(ui), True, "numeric", nonunique=nonunique)


def _se_transmitter(spec: GameSpec) -> EquilibriumResult:
    kind = "SE_transmitter_leader"
    if not spec.closed_form:
        raise NotImplementedError("transmitter-leader SE is only analysed for the linear/peak model")
    # U_I is affine in q: the follower plays q = 0 above the threshold power,
    # unbounded q below it, and is indifferent exactly at it.
    threshold = 2.0 / (spec.k * spec.c_i)
    p0 = math.sqrt(2.0 * spec.noise / (spec.k * spec.c_t))
    if p0 > threshold:
        ut, ui = utilities(spec, p0, 0.0)
        return EquilibriumResult(kind, p0, 0.0, float(ut), float(ui), True, "closed_form")
    return EquilibriumResult(
        kind, math.nan, math.nan, math.nan, math.nan, False, "closed_form",
        f"leader payoff supremum approached as p -> {threshold:g} from above is not attained: "
        "the follower's best response is degenerate there")


@dataclass(frozen=True)
class OracleResult:
    p: float
    q: float
    regret: float
    on_boundary: bool


def _grid(hi: float, resolution: float, start: float) -> np.ndarray:
    steps = int(round(hi / resolution))
    return np.arange(int(round(start / resolution)), steps + 1) * resolution


def grid_oracle(spec: GameSpec, kind: str = "NE", box: tuple[float, float] = (3.0, 3.0),
                resolution: float = 1e-3) -> OracleResult:
    """Exhaustive search on ``[res, box_p] x [0, box_q]``.

    ``NE``: the grid point minimising the larger of the two players' regrets
    (each measured against its best grid deviation). ``SE_interferer_leader``:
    leader payoff maximum over the ``q`` grid against the exact follower reply.
    """
    qs = _grid(box[1], resolution, 0.0)
    if kind == "SE_interferer_leader":
        qs = qs[qs + spec.noise > 0]
        vals = np.array([_interferer_leader_payoff(spec, q) for q in qs])
        i = int(np.argmax(vals))
        q = float(qs[i])
        return OracleResult(transmitter_best_response(spec, q), q, 0.0, i == len(qs) - 1)
    if kind != "NE":
        raise ValueError("oracle kinds: 'NE', 'SE_interferer_leader'")

    ps = _grid(box[0], resolution, resolution)
    P, Q = np.meshgrid(ps, qs, indexing="ij")
    ut, ui = utilities(spec, P, Q)
    del P, Q
    regret = ut.max(axis=0, keepdims=True) - ut
    del ut
    np.maximum(regret, ui.max(axis=1, keepdims=True) - ui, out=regret)
    del ui
    i, j = np.unravel_index(int(np.argmin(regret)), regret.shape)
    edge = i == len(ps) - 1 or j == len(qs) - 1
    return OracleResult(float(ps[i]), float(qs[j]), float(regret[i, j]), edge)
