from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agelab.slotted import (SlottedSpec, blocked_slots, brute_force_oracle, central_block_plan,
                            check_plan, exact_value, feasible_plans, plan_count,
                            simulate_slotted)

SCHEDULERS = ["round_robin", "uniform_random", "max_age"]


@pytest.mark.parametrize("scheduler", SCHEDULERS)
def test_single_user_unblocked(scheduler):
    spec = SlottedSpec(T=5, N=1, alpha=0.0, scheduler=scheduler)
    assert simulate_slotted(spec, (None,) * 5).value == 1.0


@pytest.mark.parametrize("scheduler", SCHEDULERS)
@pytest.mark.parametrize("T", [1, 3, 6])
def test_single_user_fully_blocked(scheduler, T):
    spec = SlottedSpec(T=T, N=1, alpha=1.0, scheduler=scheduler)
    res = simulate_slotted(spec, (0,) * T)
    assert res.value == pytest.approx((T + 3) / 2)
    assert res.trajectory[0] == tuple(float(t + 1) for t in range(1, T + 1))


def test_central_plan_slots():
    assert blocked_slots(central_block_plan(SlottedSpec(T=8, N=2, alpha=0.25))) == [4, 5]
    assert blocked_slots(central_block_plan(SlottedSpec(T=7, N=2, alpha=3 / 7))) == [3, 4, 5]
    assert blocked_slots(central_block_plan(SlottedSpec(T=7, N=2, alpha=0.0))) == []


def test_budget_enforced():
    spec = SlottedSpec(T=8, N=2, alpha=0.25)
    with pytest.raises(ValueError):
        check_plan(spec, (0, 0, 0) + (None,) * 5)
    with pytest.raises(ValueError):
        check_plan(spec, (2,) + (None,) * 7)
    with pytest.raises(ValueError):
        simulate_slotted(spec, (None,) * 7)


def test_central_plan_is_optimal_reference():
    spec = SlottedSpec(T=8, N=2, alpha=0.25)
    winners, best = brute_force_oracle(spec)
    assert central_block_plan(spec) in winners
    assert winners == {central_block_plan(spec, 0), central_block_plan(spec, 1)}
    assert best == Fraction(8837, 4096)


def test_oracle_single_user():
    spec = SlottedSpec(T=4, N=1, alpha=0.25)
    winners, best = brute_force_oracle(spec)
    values = {plan: exact_value(spec, plan) for plan in feasible_plans(spec)}
    assert winners == {p for p, v in values.items() if v == max(values.values())}
    # the lone user is served every slot, so any single block adds exactly one
    assert winners == {tuple(0 if i == t else None for i in range(4)) for t in range(4)}
    assert best == Fraction(5, 4)


def test_sub_carrier_maximizers_include_concentrated_block():
    spec = SlottedSpec(T=6, N=2, alpha=2 / 6, variant="sub_carrier", n_sub=2)
    winners, _ = brute_force_oracle(spec)
    concentrated = [p for p in winners if len({a for a in p if a is not None}) == 1]
    assert concentrated
    assert central_block_plan(spec) in winners
    assert all(blocked_slots(p) == [3, 4] for p in winners)


def test_monte_carlo_agrees_with_exact():
    spec = SlottedSpec(T=8, N=2, alpha=0.25, seed=3)
    plan = central_block_plan(spec)
    exact = simulate_slotted(spec, plan)
    mc = simulate_slotted(spec, plan, method="monte_carlo", replications=50_000)
    assert abs(mc.value - exact.value) < 3 * mc.stderr


def test_round_robin_steady_state():
    spec = SlottedSpec(T=40, N=4, alpha=0.0, scheduler="round_robin")
    traj = simulate_slotted(spec, (None,) * 40).trajectory
    late = [sum(traj[u][t] for u in range(4)) / 4 for t in range(8, 40)]
    assert all(v == pytest.approx((4 + 1) / 2) for v in late)


def test_plan_count_matches_enumeration():
    spec = SlottedSpec(T=6, N=3, alpha=0.34)
    assert plan_count(spec) == sum(1 for _ in feasible_plans(spec))


@settings(max_examples=30, deadline=None)
@given(T=st.integers(2, 7), N=st.integers(1, 3), data=st.data())
def test_more_budget_never_helps_the_scheduler(T, N, data):
    b = data.draw(st.integers(0, T - 1))
    small = SlottedSpec(T=T, N=N, alpha=b / T)
    big = SlottedSpec(T=T, N=N, alpha=(b + 1) / T)
    assert brute_force_oracle(big)[1] >= brute_force_oracle(small)[1]


@settings(max_examples=40, deadline=None)
@given(T=st.integers(1, 8), N=st.integers(1, 3), data=st.data())
def test_exact_float_and_fraction_agree(T, N, data):
    spec = SlottedSpec(T=T, N=N, alpha=1.0)
    plan = tuple(data.draw(st.lists(st.one_of(st.none(), st.integers(0, N - 1)),
                                    min_size=T, max_size=T)))
    assert simulate_slotted(spec, plan).value == pytest.approx(float(exact_value(spec, plan)))
