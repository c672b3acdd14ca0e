import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agelab.model import (SOURCE, JammerPlacement, Topology, apply_jammers, build_topology,
                          explicit_placement, link, make_placement)

KINDS = ["disconnected", "uni_ring", "bi_ring", "fully_connected", "line"]


def component_sizes(top):
    return sorted(len(c) for c in top.components())


def test_uni_ring_edges():
    top = build_topology("uni_ring", 4, 1.0, 2.0)
    assert sorted((u, v) for u, v, _ in top.edges) == [(0, 1), (1, 2), (2, 3), (3, 0)]
    assert all(r == 2.0 for *_, r in top.edges)


def test_fully_connected_edges():
    top = build_topology("fully_connected", 4, 1.0, 1.5)
    assert len(top.edges) == 12
    assert all(r == pytest.approx(0.5) for *_, r in top.edges)


def test_disconnected_edges():
    top = build_topology("disconnected", 5, 2.0, 1.0)
    assert top.edges == ()
    assert top.source_rates == (0.4,) * 5


def test_edge_arrays_layout():
    top = build_topology("bi_ring", 3, 1.0, 1.0)
    src, dst, rate = top.edge_arrays(source_self_rate=0.5)
    assert list(src[:3]) == [SOURCE] * 3 and list(dst[:3]) == [0, 1, 2]
    assert (src[-1], dst[-1], rate[-1]) == (SOURCE, SOURCE, 0.5)
    assert rate.sum() == pytest.approx(1.0 + 3.0 + 0.5)


@pytest.mark.parametrize("kind,n,sizes", [
    ("equidistant", 2, [3, 3]),
    ("consolidated", 3, [1, 1, 4]),
])
def test_ring_placements(kind, n, sizes):
    base = build_topology("bi_ring", 6, 1.0, 1.0)
    top = apply_jammers(base, make_placement(kind, base, n))
    assert component_sizes(top) == sizes


def test_equidistant_three_cuts():
    base = build_topology("bi_ring", 6, 1.0, 1.0)
    top = apply_jammers(base, make_placement("equidistant", base, 3))
    assert component_sizes(top) == [2, 2, 2]


def test_consolidated_links():
    base = build_topology("bi_ring", 8, 1.0, 1.0)
    assert make_placement("consolidated", base, 3).severed == {(1, 2), (2, 3), (3, 4)}


@pytest.mark.parametrize("n", [5, 6, 8, 11])
@pytest.mark.parametrize("budget", [1, 2, 3])
def test_consolidated_isolates_budget_minus_one(n, budget):
    base = build_topology("bi_ring", n, 1.0, 1.0)
    top = apply_jammers(base, make_placement("consolidated", base, budget))
    sizes = component_sizes(top)
    assert sizes.count(1) == budget - 1
    assert max(sizes) == n - budget + 1


def test_explicit_isolation_in_fully_connected():
    base = build_topology("fully_connected", 5, 1.0, 1.0)
    top = apply_jammers(base, explicit_placement([(0, v) for v in range(1, 5)]))
    assert top.components() == [[0], [1, 2, 3, 4]]
    assert top.out_rate(0) == 0.0
    # survivors re-split their full rate over the ball of 4
    assert top.out_rate(1) == pytest.approx(1.0)
    assert top.kind == "custom"


def test_no_renormalize_keeps_rates():
    base = build_topology("fully_connected", 5, 1.0, 1.0)
    top = apply_jammers(base, explicit_placement([(0, 1)]), renormalize=False)
    assert top.out_rate(1) == pytest.approx(0.75)


def test_greedy_fc_example():
    base = build_topology("fully_connected", 5, 1.0, 1.0)
    top = apply_jammers(base, make_placement("greedy_fc", base, 7))
    assert top.components() == [[0], [1], [2, 3, 4]]


def isolation_cost(n, k):
    """Fewest links whose removal from K_n leaves k isolated nodes, by enumeration."""
    links = list(itertools.combinations(range(n), 2))
    for size in range(len(links) + 1):
        for cut in itertools.combinations(links, size):
            base = build_topology("fully_connected", n, 1.0, 1.0)
            top = apply_jammers(base, explicit_placement(cut))
            if component_sizes(top).count(1) >= k:
                return size
    raise AssertionError


@pytest.mark.parametrize("n,k", [(3, 1), (4, 1), (4, 2), (5, 1), (5, 2), (6, 1), (6, 2)])
def test_greedy_fc_cost_matches_enumeration(n, k):
    cost = k * n - k * (k + 1) // 2
    assert isolation_cost(n, k) == cost
    base = build_topology("fully_connected", n, 1.0, 1.0)
    top = apply_jammers(base, make_placement("greedy_fc", base, cost))
    assert component_sizes(top).count(1) >= k


def test_placement_errors():
    base = build_topology("bi_ring", 6, 1.0, 1.0)
    with pytest.raises(ValueError):
        make_placement("equidistant", base, 7)
    with pytest.raises(ValueError):
        make_placement("greedy_fc", base, 2)
    with pytest.raises(ValueError):
        apply_jammers(base, explicit_placement([(0, 3)]))
    with pytest.raises(ValueError):
        JammerPlacement(frozenset({(0, 1), (1, 2)}), 1)
    with pytest.raises(ValueError):
        build_topology("bi_ring", 0, 1.0, 1.0)


def test_random_placement_seeded():
    base = build_topology("fully_connected", 8, 1.0, 1.0)
    a = make_placement("random", base, 5, seed=3)
    assert a == make_placement("random", base, 5, seed=3)
    assert len(a.severed) == 5 and a.severed <= base.links()


@settings(max_examples=40, deadline=None)
@given(kind=st.sampled_from(KINDS), n=st.integers(1, 12),
       ls=st.floats(0.1, 10), lam=st.floats(0.0, 10))
def test_topology_invariants(kind, n, ls, lam):
    top = build_topology(kind, n, ls, lam)
    assert sum(top.source_rates) == pytest.approx(ls)
    for i in range(n):
        if top.out_neighbors(i):
            assert top.out_rate(i) == pytest.approx(lam)
    assert sum(map(len, top.components())) == n
    again = Topology.from_dict(json.loads(top.to_json()))
    assert again == top


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 12), data=st.data())
def test_placement_json_round_trip(n, data):
    base = build_topology("bi_ring", n, 1.0, 1.0)
    budget = data.draw(st.integers(0, n))
    p = make_placement("random", base, budget, seed=data.draw(st.integers(0, 99)))
    assert JammerPlacement.from_dict(json.loads(json.dumps(p.to_dict()))) == p
    cut = apply_jammers(base, p)
    assert cut.links() == base.links() - p.severed


def test_link_canonical():
    assert link(3, 1) == link(1, 3) == (1, 3)
