"""Slotted base-station scheduling against an oblivious blocking adversary.

Ages start at 1; in slot t the served user's age resets to 1 if the delivery
gets through, every other age grows by one. The reported value is
``(1 / (T N)) * sum_{t=1..T} sum_u a_u(t)``.

Slots are numbered from 1 in the API; plans are stored as tuples indexed from 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

SCHEDULERS = ("round_robin", "uniform_random", "max_age")
VARIANTS = ("per_user", "sub_carrier")
MAX_PLANS = 10**7


@dataclass(frozen=True)
class SlottedSpec:
    T: int
    N: int
    alpha: float
    variant: str = "per_user"
    n_sub: int = 1
    scheduler: str = "uniform_random"
    seed: int = 0

    def __post_init__(self):
        if self.T < 1 or self.N < 1:
            raise ValueError("T and N must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.variant not in VARIANTS or self.scheduler not in SCHEDULERS:
            raise ValueError("unknown variant or scheduler")
        if self.variant == "sub_carrier" and self.n_sub < 1:
            raise ValueError("sub-carrier variant needs n_sub >= 1")

    @property
    def budget(self) -> int:
        return math.floor(self.alpha * self.T + 1e-9)

    @property
    def targets(self) -> int:
        """Number of things the adversary can block in one slot."""
        return self.N if self.variant == "per_user" else self.n_sub


Plan = tuple  # per slot: None or the blocked user / sub-carrier id


def check_plan(spec: SlottedSpec, plan: Plan) -> None:
    if len(plan) != spec.T:
        raise ValueError(f"plan covers {len(plan)} slots, horizon is {spec.T}")
    used = sum(a is not None for a in plan)
    if used > spec.budget:
        raise ValueError(f"plan blocks {used} slots, budget is {spec.budget}")
    for a in plan:
        if a is not None and not 0 <= a < spec.targets:
            raise ValueError(f"invalid blocking target {a}")


def central_block_plan(spec: SlottedSpec, victim: int = 0) -> Plan:
    """Block ``victim`` in slots ``floor((T-B)/2)+1 .. floor((T-B)/2)+B``."""
    if not 0 <= victim < spec.targets:
        raise ValueError("victim out of range")
    b = spec.budget
    first = (spec.T - b) // 2  # zero-based index of slot floor((T-B)/2)+1
    return tuple(victim if first <= i < first + b else None for i in range(spec.T))


def blocked_slots(plan: Plan) -> list[int]:
    """One-based slots that the plan blocks."""
    return [i + 1 for i, a in enumerate(plan) if a is not None]


def _success_probs(spec: SlottedSpec, plan: Plan, one=1.0):
    """Per-user, per-slot delivery probability under the uniform scheduler."""
    pick = one / spec.N
    probs = [[pick] * spec.T for _ in range(spec.N)]
    for t, a in enumerate(plan):
        if a is None:
            continue
        if spec.variant == "per_user":
            probs[a][t] = 0 * one
        else:
            for u in range(spec.N):
                probs[u][t] = pick * (1 - one / spec.n_sub)
    return probs


def expected_ages(spec: SlottedSpec, plan: Plan, exact: bool = False):
    """Expected age trajectories ``[u][t-1]`` for the uniform scheduler.

    Success in a slot is independent of the current age, so the expectation
    obeys ``E a(t) = s_t + (1 - s_t) (E a(t-1) + 1)``.
    """
    one = Fraction(1) if exact else 1.0
    traj = []
    for s in _success_probs(spec, plan, one):
        a = one
        row = []
        for st in s:
            a = st + (1 - st) * (a + 1)
            row.append(a)
        traj.append(row)
    return traj


def _deterministic_ages(spec: SlottedSpec, plan: Plan) -> np.ndarray:
    ages = np.ones(spec.N, dtype=np.int64)
    out = np.empty((spec.N, spec.T), dtype=np.int64)
    for t in range(spec.T):
        if spec.scheduler == "round_robin":
            u = t % spec.N
        else:
            u = int(np.argmax(ages))
        a = plan[t]
        if spec.variant == "per_user":
            ok = a != u
        else:
            ok = a != t % spec.n_sub
        ages += 1
        if ok:
            ages[u] = 1
        out[:, t] = ages
    return out


@dataclass(frozen=True)
class SlottedResult:
    value: float
    trajectory: tuple[tuple[float, ...], ...]
    stderr: float = 0.0
    method: str = "exact"


def _monte_carlo(spec: SlottedSpec, plan: Plan, replications: int) -> SlottedResult:
    rng = np.random.default_rng(spec.seed)
    users = rng.integers(spec.N, size=(replications, spec.T))
    ok = np.ones((replications, spec.T), dtype=bool)
    plan_arr = np.array([-1 if a is None else a for a in plan])
    if spec.variant == "per_user":
        ok &= users != plan_arr
    else:
        subs = rng.integers(spec.n_sub, size=(replications, spec.T))
        ok &= subs != plan_arr
    ages = np.ones((replications, spec.N))
    total = np.zeros(replications)
    traj = np.zeros((spec.N, spec.T))
    rows = np.arange(replications)
    for t in range(spec.T):
        ages += 1
        hit = rows[ok[:, t]]
        ages[hit, users[hit, t]] = 1
        total += ages.sum(axis=1)
        traj[:, t] = ages.mean(axis=0)
    per_rep = total / (spec.T * spec.N)
    se = float(per_rep.std(ddof=1) / math.sqrt(replications)) if replications > 1 else math.inf
    return SlottedResult(float(per_rep.mean()), tuple(map(tuple, traj.tolist())), se, "monte_carlo")


def simulate_slotted(spec: SlottedSpec, plan: Plan, method: str = "exact",
                     replications: int = 10_000) -> SlottedResult:
    """Average age of the plan; uniform scheduling is evaluated exactly or by
    seeded Monte Carlo, deterministic schedulers always exactly."""
    check_plan(spec, plan)
    if spec.scheduler != "uniform_random":
        ages = _deterministic_ages(spec, plan)
        value = float(ages.sum()) / (spec.T * spec.N)
        return SlottedResult(value, tuple(map(tuple, ages.astype(float).tolist())))
    if method == "monte_carlo":
        return _monte_carlo(spec, plan, replications)
    if method != "exact":
        raise ValueError("method must be 'exact' or 'monte_carlo'")
    traj = expected_ages(spec, plan)
    value = sum(map(sum, traj)) / (spec.T * spec.N)
    return SlottedResult(value, tuple(map(tuple, traj)))


def exact_value(spec: SlottedSpec, plan: Plan):
    """Average age as an exact ``Fraction`` (uniform) or integer ratio (deterministic)."""
    if spec.scheduler == "uniform_random":
        traj = expected_ages(spec, plan, exact=True)
        return sum(map(sum, traj)) / (spec.T * spec.N)
    return Fraction(int(_deterministic_ages(spec, plan).sum()), spec.T * spec.N)


def feasible_plans(spec: SlottedSpec):
    """Every plan with at most ``budget`` blocked slots."""
    b = min(spec.budget, spec.T)
    for k in range(b + 1):
        for slots in itertools.combinations(range(spec.T), k):
            for targets in itertools.product(range(spec.targets), repeat=k):
                plan = [None] * spec.T
                for s, a in zip(slots, targets):
                    plan[s] = a
                yield tuple(plan)


def plan_count(spec: SlottedSpec) -> int:
    b = min(spec.budget, spec.T)
    return sum(math.comb(spec.T, k) * spec.targets**k for k in range(b + 1))


def brute_force_oracle(spec: SlottedSpec):
    """All plans attaining the maximum exact average age, and that maximum."""
    if plan_count(spec) > MAX_PLANS:
        raise ValueError(f"{plan_count(spec)} feasible plans exceed the enumeration limit")
    best = None
    winners: list[Plan] = []
    for plan in feasible_plans(spec):
        v = exact_value(spec, plan)
        if best is None or v > best:
            best, winners = v, [plan]
        elif v == best:
            winners.append(plan)
    return set(winners), best
