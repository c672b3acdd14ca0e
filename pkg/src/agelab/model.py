"""Packets, gossip topologies and jammer placements.

Users are indexed ``0..n-1`` (around the ring for ring kinds). The source is not
a user; in edge arrays it is encoded as ``SOURCE = -1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

SOURCE = -1

TOPOLOGY_KINDS = ("disconnected", "uni_ring", "bi_ring", "fully_connected", "line", "custom")
PLACEMENT_STRATEGIES = ("equidistant", "consolidated", "random", "greedy_fc", "explicit")


@dataclass(frozen=True)
class Packet:
    true_gen_time: float
    marked_ts: float
    version: int = 0
    accurate: bool = True


Link = tuple[int, int]


def link(a: int, b: int) -> Link:
    """Canonical undirected link key."""
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Topology:
    """Users plus directed gossip edges ``(sender, receiver, rate)``.

    ``gossip_rate`` is the per-node total outgoing rate used when rates are
    re-split after jamming; ``source_rates[i]`` is the source-to-user rate.
    """

    n: int
    kind: str
    edges: tuple[tuple[int, int, float], ...]
    source_rates: tuple[float, ...]
    gossip_rate: float = 0.0
    source_rate: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("topology needs at least one user")
        if self.kind not in TOPOLOGY_KINDS:
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if len(self.source_rates) != self.n:
            raise ValueError("source_rates must have one entry per user")
        for u, v, r in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
                raise ValueError(f"bad edge ({u}, {v})")
            if r < 0 or not np.isfinite(r):
                raise ValueError(f"bad rate {r} on edge ({u}, {v})")
        if any(r < 0 or not np.isfinite(r) for r in self.source_rates):
            raise ValueError("source rates must be finite and non-negative")

    def links(self) -> set[Link]:
        return {link(u, v) for u, v, _ in self.edges}

    def out_neighbors(self, node: int) -> list[int]:
        return sorted(v for u, v, _ in self.edges if u == node)

    def out_rate(self, node: int) -> float:
        return sum(r for u, _, r in self.edges if u == node)

    def total_rate(self) -> float:
        return sum(r for *_, r in self.edges) + sum(self.source_rates)

    def components(self) -> list[list[int]]:
        """Connected components of the undirected user graph, sorted."""
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.links():
            parent[find(u)] = find(v)
        groups: dict[int, list[int]] = {}
        for i in range(self.n):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values(), key=lambda g: (len(g), g[0]))

    def edge_arrays(self, source_self_rate: float = 0.0):
        """Flat ``(src, dst, rate)`` arrays: source edges, user edges, then the
        optional source self-update pseudo-edge ``(SOURCE, SOURCE)``."""
        src = [SOURCE] * self.n + [u for u, _, _ in self.edges]
        dst = list(range(self.n)) + [v for _, v, _ in self.edges]
        rate = list(self.source_rates) + [r for *_, r in self.edges]
        if source_self_rate > 0:
            src.append(SOURCE)
            dst.append(SOURCE)
            rate.append(source_self_rate)
        return (np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64),
                np.asarray(rate, dtype=np.float64))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind,
            "gossip_rate": self.gossip_rate,
            "source_rate": self.source_rate,
            "edges": [[u, v, r] for u, v, r in self.edges],
            "source_edges": list(self.source_rates),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Topology:
        return cls(
            n=int(d["n"]),
            kind=d["kind"],
            edges=tuple((int(u), int(v), float(r)) for u, v, r in d["edges"]),
            source_rates=tuple(float(r) for r in d["source_edges"]),
            gossip_rate=float(d.get("gossip_rate", 0.0)),
            source_rate=float(d.get("source_rate", 0.0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _split_uniform(n: int, neighbors: dict[int, set[int]], lam: float):
    edges = []
    for u in range(n):
        nbrs = sorted(neighbors.get(u, ()))
        for v in nbrs:
            edges.append((u, v, lam / len(nbrs)))
    return tuple(edges)


def _ring_neighbors(n: int, kind: str) -> dict[int, set[int]]:
    nbrs: dict[int, set[int]] = {i: set() for i in range(n)}
    hops = n - 1 if kind == "line" else n
    for i in range(hops if n > 1 else 0):
        j = (i + 1) % n
        nbrs[i].add(j)
        if kind != "uni_ring":
            nbrs[j].add(i)
    return nbrs


def build_topology(kind: str, n: int, source_rate: float, gossip_rate: float) -> Topology:
    """Generate one of the standard topologies.

    Every user splits ``gossip_rate`` uniformly over its out-neighbours; the
    source reaches each user at ``source_rate / n``.
    """
    if kind not in TOPOLOGY_KINDS or kind == "custom":
        raise ValueError(f"cannot generate topology kind {kind!r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if source_rate <= 0:
        raise ValueError("source rate must be positive")
    if gossip_rate < 0:
        raise ValueError("gossip rate must be non-negative")

    if kind == "disconnected":
        nbrs: dict[int, set[int]] = {}
    elif kind == "fully_connected":
        nbrs = {i: set(range(n)) - {i} for i in range(n)}
    else:
        nbrs = _ring_neighbors(n, kind)
    return Topology(
        n=n,
        kind=kind,
        edges=_split_uniform(n, nbrs, gossip_rate) if gossip_rate > 0 else (),
        source_rates=(source_rate / n,) * n,
        gossip_rate=gossip_rate,
        source_rate=source_rate,
    )


@dataclass(frozen=True)
class JammerPlacement:
    severed: frozenset[Link]
    budget: int
    strategy: str = "explicit"

    def __post_init__(self):
        if self.strategy not in PLACEMENT_STRATEGIES:
            raise ValueError(f"unknown placement strategy {self.strategy!r}")
        if len(self.severed) > self.budget:
            raise ValueError("placement exceeds its jammer budget")

    def to_dict(self) -> dict:
        return {"strategy": self.strategy, "budget": self.budget,
                "severed": sorted([list(p) for p in self.severed])}

    @classmethod
    def from_dict(cls, d: dict) -> JammerPlacement:
        return cls(frozenset(link(int(a), int(b)) for a, b in d["severed"]),
                   int(d["budget"]), d.get("strategy", "explicit"))


def explicit_placement(links, budget: int | None = None) -> JammerPlacement:
    severed = frozenset(link(a, b) for a, b in links)
    return JammerPlacement(severed, len(severed) if budget is None else budget, "explicit")


def apply_jammers(topology: Topology, placement: JammerPlacement, renormalize: bool = True) -> Topology:
    """Remove both directions of every severed link.

    With ``renormalize`` each user re-splits its full gossip rate over its
    surviving out-neighbours; otherwise surviving edges keep their old rates.
    """
    present = topology.links()
    missing = [l for l in placement.severed if l not in present]
    if missing:
        raise ValueError(f"severed links absent from topology: {sorted(missing)}")

    kept = [(u, v, r) for u, v, r in topology.edges if link(u, v) not in placement.severed]
    if renormalize:
        nbrs: dict[int, set[int]] = {}
        for u, v, _ in kept:
            nbrs.setdefault(u, set()).add(v)
        edges = _split_uniform(topology.n, nbrs, topology.gossip_rate)
    else:
        edges = tuple(kept)
    kind = topology.kind if not placement.severed else "custom"
    return replace(topology, kind=kind, edges=edges)


def _ring_links(n: int) -> list[Link]:
    return [link(i, (i + 1) % n) for i in range(n)]


def make_placement(strategy: str, base: Topology, budget: int, seed: int | None = None) -> JammerPlacement:
    """Choose ``budget`` links of ``base`` to sever according to ``strategy``."""
    links = base.links()
    if budget < 0 or budget > len(links):
        raise ValueError(f"budget {budget} exceeds the {len(links)} links of the topology")
    n = base.n

    if strategy in ("equidistant", "consolidated"):
        if base.kind not in ("uni_ring", "bi_ring") or n < 3:
            raise ValueError(f"{strategy} placement needs a ring topology")
        if strategy == "consolidated":
            chosen = [link((1 + j) % n, (2 + j) % n) for j in range(budget)]
        else:
            chosen = [link((j * n) // budget, ((j * n) // budget + 1) % n) for j in range(budget)]
    elif strategy == "random":
        rng = np.random.default_rng(seed)
        pool = sorted(links)
        idx = rng.choice(len(pool), size=budget, replace=False)
        chosen = [pool[i] for i in sorted(idx)]
    elif strategy == "greedy_fc":
        if base.kind != "fully_connected":
            raise ValueError("greedy_fc placement needs a fully connected topology")
        chosen = []
        remaining = budget
        ball = list(range(n))
        while ball and remaining > 0:
            victim, rest = ball[0], ball[1:]
            cut = [link(victim, v) for v in rest][:remaining]
            chosen.extend(cut)
            remaining -= len(cut)
            if len(cut) < len(rest):
                break
            ball = rest
    elif strategy == "explicit":
        raise ValueError("use explicit_placement() for explicit link sets")
    else:
        raise ValueError(f"unknown placement strategy {strategy!r}")
    return JammerPlacement(frozenset(chosen), budget, strategy)
