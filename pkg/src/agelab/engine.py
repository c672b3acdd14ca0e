"""Continuous-time gossip simulator with timestomping and mutation adversaries.

All event times and per-event decisions come from pre-drawn blocks
(``DrawStream``): each event consumes one exponential and four uniforms
(edge choice, outgoing stomp, mutation, incoming stomp) whether or not it uses
them. The compiled kernel and the pure-Python reference path therefore see the
same randomness and can be compared bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel
from .metrics import MetricsAccumulator, MetricsReport
from .model import SOURCE, Packet, Topology

MODES = ("timestamp", "version")
ADVERSARY_KINDS = {
    "none": _kernel.ADV_NONE,
    "timestomp_node": _kernel.ADV_TIMESTOMP_NODE,
    "timestomp_source_link": _kernel.ADV_TIMESTOMP_LINK,
    "mutation": _kernel.ADV_MUTATION,
}
TARGETS = ("current_time", "zero")
BLOCK = 1 << 15


@dataclass(frozen=True)
class AdversaryConfig:
    kind: str = "none"
    infected_node: int = 0
    victim_node: int = 0
    p_out: float = 0.0
    target_out: str = "current_time"
    q_in: float = 0.0
    target_in: str = "zero"
    p_mut: float = 0.0
    # Off: deliveries straight from the source bypass the infected node's
    # incoming stomp (only gossip packets are intercepted).
    stomp_source_deliveries: bool = False

    def __post_init__(self):
        if self.kind not in ADVERSARY_KINDS:
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        for name in ("p_out", "q_in", "p_mut"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability, got {p}")
        if self.target_out not in TARGETS or self.target_in not in TARGETS:
            raise ValueError("timestomp targets are 'current_time' or 'zero'")
        if self.infected_node < 0 or self.victim_node < 0:
            raise ValueError("adversaries act on user nodes, never the source")

    @classmethod
    def optimal_timestomp(cls, node: int = 0) -> AdversaryConfig:
        return cls("timestomp_node", infected_node=node, p_out=1.0, target_out="current_time",
                   q_in=1.0, target_in="zero")


@dataclass(frozen=True)
class GossipScenario:
    topology: Topology
    mode: str = "timestamp"
    version_rate: float = 0.0
    adversary: AdversaryConfig = field(default_factory=AdversaryConfig)
    horizon: float = 100.0
    warmup_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1)")
        if self.mode == "version" and not self.version_rate > 0:
            raise ValueError("version mode needs a positive source version rate")
        adv = self.adversary
        node = adv.victim_node if adv.kind == "timestomp_source_link" else adv.infected_node
        if adv.kind != "none" and node >= self.topology.n:
            raise ValueError(f"adversary node {node} is not a user of this topology")
        if adv.kind == "mutation" and self.mode != "version":
            raise ValueError("mutation is modelled in version mode only")

    @property
    def window(self) -> tuple[float, float]:
        return self.warmup_fraction * self.horizon, self.horizon

    def edge_arrays(self):
        rate_e = self.version_rate if self.mode == "version" else 0.0
        return self.topology.edge_arrays(source_self_rate=rate_e)


class DrawStream:
    """Blocks of ``(exponentials, uniforms[:, 4])`` from one seeded generator."""

    def __init__(self, seed: int, block: int = BLOCK):
        self.rng = np.random.default_rng(seed)
        self.block = block

    def next_block(self):
        exps = self.rng.standard_exponential(self.block)
        us = self.rng.random((self.block, 4))
        return exps, us


@dataclass
class SimState:
    now: float
    gen: np.ndarray
    marked: np.ndarray
    version: np.ndarray
    accurate: np.ndarray
    source_version: np.ndarray
    source_gen: np.ndarray
    metrics: MetricsAccumulator
    events: int = 0

    @classmethod
    def initial(cls, scenario: GossipScenario) -> SimState:
        n = scenario.topology.n
        w0, w1 = scenario.window
        return cls(
            now=0.0,
            gen=np.zeros(n),
            marked=np.zeros(n),
            version=np.zeros(n, dtype=np.int64),
            accurate=np.ones(n, dtype=np.bool_),
            source_version=np.zeros(1, dtype=np.int64),
            source_gen=np.zeros(1),
            metrics=MetricsAccumulator(n, w0, w1),
        )

    def packet(self, node: int, mode: str = "timestamp") -> Packet:
        if node == SOURCE:
            if mode == "version":
                g = float(self.source_gen[0])
                return Packet(g, g, int(self.source_version[0]), True)
            return Packet(self.now, self.now, 0, True)
        return Packet(float(self.gen[node]), float(self.marked[node]),
                      int(self.version[node]), bool(self.accurate[node]))

    def store(self, node: int, pkt: Packet) -> None:
        self.metrics.settle(node, self.now, self.gen[node], self.version[node], self.accurate[node])
        self.gen[node] = pkt.true_gen_time
        self.marked[node] = pkt.marked_ts
        self.version[node] = pkt.version
        self.accurate[node] = pkt.accurate

    def finish(self, horizon: float) -> None:
        self.now = horizon
        acc = self.metrics
        for i in range(self.gen.size):
            acc.settle(i, horizon, self.gen[i], self.version[i], self.accurate[i])
        acc.settle_source(horizon, int(self.source_version[0]))


def _uniform(rng, u):
    return rng.random() if u is None else u


def accept_timestamp(incumbent: Packet, incoming: Packet) -> Packet:
    """Keep the packet with the strictly larger marked timestamp."""
    return incoming if incoming.marked_ts > incumbent.marked_ts else incumbent


def accept_version(incumbent: Packet, incoming: Packet) -> Packet:
    """Newer version wins; on equal versions an accurate copy beats an inaccurate one."""
    if incoming.version != incumbent.version:
        return incoming if incoming.version > incumbent.version else incumbent
    if incoming.accurate and not incumbent.accurate:
        return incoming
    return incumbent


def timestomp(packet: Packet, direction: str, config: AdversaryConfig, now: float,
              rng=None, *, u: float | None = None) -> Packet:
    """Rewrite ``marked_ts`` with the direction's probability; nothing else changes."""
    if direction == "outgoing":
        p, target = config.p_out, config.target_out
    elif direction == "incoming":
        p, target = config.q_in, config.target_in
    else:
        raise ValueError("direction must be 'outgoing' or 'incoming'")
    if _uniform(rng, u) < p:
        return replace(packet, marked_ts=now if target == "current_time" else 0.0)
    return packet


def mutate(packet: Packet, p_mut: float, rng=None, *, u: float | None = None) -> Packet:
    if _uniform(rng, u) < p_mut:
        return replace(packet, accurate=False)
    return packet


def sample_next_event(cum_rates: np.ndarray, exp_draw: float, u_draw: float):
    """Next event of the superposed Poisson streams.

    ``cum_rates`` is the cumulative rate vector. Returns ``(dt, edge_index)``, or
    ``None`` when the total rate is zero.
    """
    if cum_rates.size == 0 or cum_rates[-1] <= 0:
        return None
    total = cum_rates[-1]
    j = int(np.searchsorted(cum_rates, u_draw * total, side="right"))
    return exp_draw / total, min(j, cum_rates.size - 1)


def apply_event(state: SimState, sender: int, receiver: int, scenario: GossipScenario,
                us) -> tuple[Packet, Packet] | None:
    """Apply one event at ``state.now``.

    ``us`` holds the event's three decision uniforms (outgoing stomp, mutation,
    incoming stomp). Returns the receiver's ``(before, after)`` packets, or
    ``None`` for a source self-update.
    """
    mode = scenario.mode
    adv = scenario.adversary
    now = state.now
    if sender == SOURCE and receiver == SOURCE:
        state.metrics.settle_source(now, int(state.source_version[0]))
        state.source_version[0] += 1
        state.source_gen[0] = now
        return None

    pkt = state.packet(sender, mode)
    if adv.kind == "timestomp_node" and sender == adv.infected_node:
        pkt = timestomp(pkt, "outgoing", adv, now, u=us[0])
    if mode == "version" and adv.kind == "mutation" and sender != SOURCE:
        pkt = mutate(pkt, adv.p_mut, u=us[1])
    intercepted = (
        (adv.kind == "timestomp_node" and receiver == adv.infected_node
         and (sender != SOURCE or adv.stomp_source_deliveries))
        or (adv.kind == "timestomp_source_link" and sender == SOURCE
            and receiver == adv.victim_node)
    )
    if intercepted:
        pkt = timestomp(pkt, "incoming", adv, now, u=us[2])

    before = state.packet(receiver, mode)
    rule = accept_version if mode == "version" else accept_timestamp
    after = rule(before, pkt)
    if after is pkt:
        state.store(receiver, pkt)
    return before, after


def _report(scenario: GossipScenario, state: SimState) -> MetricsReport:
    acc = state.metrics
    n = scenario.topology.n
    if scenario.mode == "version":
        return MetricsReport(
            mode="version", n=n, span=acc.span, events=state.events,
            mean_age=tuple(acc.mean_age().tolist()),
            version_age=tuple(acc.mean_version_age().tolist()),
            fraction_accurate=float(acc.acc_int.sum() / (n * acc.span)),
            accurate_time=tuple((acc.acc_int / acc.span).tolist()),
        )
    return MetricsReport(mode="timestamp", n=n, span=acc.span, events=state.events,
                         mean_age=tuple(acc.mean_age().tolist()))


def _packet_json(p: Packet) -> dict:
    return {"true_gen_time": p.true_gen_time, "marked_ts": p.marked_ts,
            "version": p.version, "accurate": p.accurate}


def run_reference(scenario: GossipScenario, trace=None) -> MetricsReport:
    """Pure-Python event loop; optionally writes one JSON line per event to ``trace``."""
    src, dst, rates = scenario.edge_arrays()
    cum = np.cumsum(rates)
    state = SimState.initial(scenario)
    horizon = scenario.horizon
    draws = DrawStream(scenario.seed)
    while cum.size and cum[-1] > 0:
        exps, us = draws.next_block()
        done = False
        for k in range(exps.size):
            dt, j = sample_next_event(cum, exps[k], us[k, 0])
            t_next = state.now + dt
            if t_next > horizon:
                done = True
                break
            state.now = t_next
            s, d = int(src[j]), int(dst[j])
            change = apply_event(state, s, d, scenario, us[k, 1:])
            state.events += 1
            if trace is not None:
                rec = {"t": state.now, "edge": [s, d]}
                if change is not None:
                    rec["pre"], rec["post"] = map(_packet_json, change)
                trace.write(json.dumps(rec) + "\n")
        if done:
            break
    state.finish(horizon)
    return _report(scenario, state)


def run(scenario: GossipScenario, trace=None) -> MetricsReport:
    """Simulate ``scenario`` over ``[0, horizon]``.

    Uses the compiled kernel unless a ``trace`` sink is given, in which case the
    reference loop runs (both give identical results).
    """
    if trace is not None:
        return run_reference(scenario, trace)
    src, dst, rates = scenario.edge_arrays()
    cum = np.cumsum(rates)
    state = SimState.initial(scenario)
    acc = state.metrics
    adv = scenario.adversary
    w0, horizon = scenario.window
    draws = DrawStream(scenario.seed)
    t = 0.0
    while cum.size and cum[-1] > 0:
        exps, us = draws.next_block()
        t, k, done = _kernel.run_block(
            t, horizon, w0, cum, src, dst, scenario.mode == "version",
            ADVERSARY_KINDS[adv.kind], adv.infected_node, adv.victim_node,
            adv.p_out, adv.target_out == "current_time", adv.q_in,
            adv.target_in == "current_time", adv.p_mut, adv.stomp_source_deliveries,
            state.gen, state.marked, state.version, state.accurate,
            state.source_version, state.source_gen,
            acc.last, acc.age_int, acc.ver_int, acc.acc_int, acc.src_int,
            exps, us)
        state.events += k
        if done:
            break
    state.finish(horizon)
    return _report(scenario, state)


def replicate(scenario: GossipScenario, replications: int) -> list[MetricsReport]:
    """Independent runs seeded ``seed ^ r`` for ``r = 0..replications-1``."""
    return [run(replace(scenario, seed=scenario.seed ^ r)) for r in range(replications)]


def default_horizon(n: int, source_rate: float) -> float:
    return 200.0 * max(1.0, float(np.sqrt(n))) / source_rate
