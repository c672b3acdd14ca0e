"""Experiment configs, grid sweeps and result files."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .engine import AdversaryConfig, GossipScenario, default_horizon, run
from .games import GameSpec, solve_ne, solve_se
from .metrics import format_value
from .model import apply_jammers, build_topology, make_placement
from .slotted import (SlottedSpec, brute_force_oracle, central_block_plan, check_plan,
                      exact_value, simulate_slotted)

KINDS = ("simulate", "scaling", "timestomp", "jamming", "mutation", "game", "slotted")

GOSSIP_DEFAULTS = {
    "topology": "fully_connected",
    "n": 16,
    "source_rate": 1.0,
    "gossip_rate": 1.0,
    "horizon": None,
    "warmup_fraction": 0.2,
    "mode": "timestamp",
    "version_rate": 1.0,
    "adversary": "none",
    "infected_node": 0,
    "victim_node": 0,
    "p_out": 0.0,
    "target_out": "current_time",
    "q_in": 0.0,
    "target_in": "zero",
    "p_mut": 0.0,
    "stomp_source_deliveries": False,
    "jammer_strategy": None,
    "jammers": 0,
    "jammer_exponent": None,
    "renormalize": True,
    "confidence": 0.95,
}

DEFAULTS = {
    "simulate": GOSSIP_DEFAULTS,
    "scaling": GOSSIP_DEFAULTS,
    "timestomp": {**GOSSIP_DEFAULTS, "adversary": "timestomp_node", "p_out": 1.0, "q_in": 1.0},
    "jamming": {**GOSSIP_DEFAULTS, "topology": "bi_ring", "jammer_strategy": "equidistant"},
    "mutation": {**GOSSIP_DEFAULTS, "n": 32, "mode": "version", "adversary": "mutation",
                 "p_mut": 0.3},
    "game": {"lam": 1.0, "k": 2.0, "noise": 0.0, "c_t": 1.0, "c_i": 1.0,
             "rate_model": "linear", "objective": "peak"},
    "slotted": {"T": 8, "N": 2, "alpha": 0.25, "variant": "per_user", "n_sub": 1,
                "scheduler": "uniform_random", "plan": "central", "victim": 0,
                "method": "exact", "mc_replications": 10000},
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    grid: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    replications: int = 1
    seed: int = 0
    out_dir: str = "results"
    per_node: bool = False
    format: str = "csv"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        defaults = DEFAULTS[self.kind]
        for key, values in self.grid.items():
            if key not in defaults:
                raise ConfigError(f"unknown grid parameter {key!r} for {self.kind}")
            if not isinstance(values, list) or not values:
                raise ConfigError(f"grid entry {key!r} must be a non-empty list")
        for key in self.params:
            if key not in defaults:
                raise ConfigError(f"unknown parameter {key!r} for {self.kind}")
        # materialise every default so the manifest is self-describing
        self.params = {**defaults, **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        d = dict(d)
        kind = d.pop("experiment", d.pop("kind", None))
        if kind is None:
            raise ConfigError("config needs an 'experiment' field")
        allowed = {"grid", "params", "replications", "seed", "out_dir", "per_node", "format"}
        extra = set(d) - allowed
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        try:
            return cls(kind=kind, **d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["experiment"] = d.pop("kind")
        return d

    def cells(self) -> list[dict]:
        keys = list(self.grid)
        combos = itertools.product(*(self.grid[k] for k in keys)) if keys else [()]
        return [{**self.params, **dict(zip(keys, combo))} for combo in combos]


def scenario_from_params(p: dict, seed: int) -> GossipScenario:
    n = int(p["n"])
    topology = build_topology(p["topology"], n, float(p["source_rate"]), float(p["gossip_rate"]))
    if p.get("jammer_strategy"):
        count = int(p["jammers"])
        if p.get("jammer_exponent") is not None:
            count = math.ceil(n ** float(p["jammer_exponent"]) - 1e-9)
        if count > 0:
            placement = make_placement(p["jammer_strategy"], topology, count, seed=seed)
            topology = apply_jammers(topology, placement, renormalize=bool(p["renormalize"]))
    adversary = AdversaryConfig(
        kind=p["adversary"], infected_node=int(p["infected_node"]),
        victim_node=int(p["victim_node"]), p_out=float(p["p_out"]), target_out=p["target_out"],
        q_in=float(p["q_in"]), target_in=p["target_in"], p_mut=float(p["p_mut"]),
        stomp_source_deliveries=bool(p["stomp_source_deliveries"]))
    horizon = p["horizon"]
    if horizon is None:
        horizon = default_horizon(n, float(p["source_rate"]))
    return GossipScenario(topology, mode=p["mode"], version_rate=float(p["version_rate"]),
                          adversary=adversary, horizon=float(horizon),
                          warmup_fraction=float(p["warmup_fraction"]), seed=seed)


def _gossip_rows(params: dict, seed: int, per_node: bool) -> list[tuple[str, str, float]]:
    report = run(scenario_from_params(params, seed))
    ages = np.asarray(report.mean_age)
    rows = [("network", "mean_age", report.network_age),
            ("network", "median_age", float(np.median(ages)))]
    if report.mode == "version":
        rows.append(("network", "version_age", report.network_version_age))
        rows.append(("network", "fraction_accurate", report.fraction_accurate))
    if per_node:
        rows += [(str(i), "mean_age", float(a)) for i, a in enumerate(ages)]
    return rows


def _game_rows(params: dict) -> list[tuple[str, str, float]]:
    spec = GameSpec(lam=float(params["lam"]), k=float(params["k"]), noise=float(params["noise"]),
                    c_t=float(params["c_t"]), c_i=float(params["c_i"]),
                    rate_model=params["rate_model"], objective=params["objective"])
    rows = []
    results = [solve_ne(spec), solve_se(spec, "interferer")]
    if spec.closed_form:
        results.append(solve_se(spec, "transmitter"))
    for r in results:
        for metric, value in (("p", r.p), ("q", r.q), ("u_t", r.u_t), ("u_i", r.u_i),
                              ("exists", float(r.exists))):
            rows.append((r.kind, metric, value))
    return rows


def _plan_str(plan) -> str:
    return ",".join("-" if a is None else str(a) for a in plan)


def load_plan(path, T: int):
    """Plan file: one line of comma-separated slot actions, ``-`` or a target id."""
    fields = Path(path).read_text().strip().split(",")
    try:
        plan = tuple(None if f.strip() == "-" else int(f) for f in fields)
    except ValueError as exc:
        raise ConfigError(f"bad plan file {path}: {exc}") from None
    if len(plan) != T:
        raise ConfigError(f"plan file {path} has {len(plan)} slots, expected {T}")
    return plan


def _slotted_rows(params: dict, seed: int) -> list[tuple[str, str, float]]:
    spec = SlottedSpec(T=int(params["T"]), N=int(params["N"]), alpha=float(params["alpha"]),
                       variant=params["variant"], n_sub=int(params["n_sub"]),
                       scheduler=params["scheduler"], seed=seed)
    source = params["plan"]
    optimal_set, optimal_value = None, None
    if source == "central":
        plans = [central_block_plan(spec, int(params["victim"]))]
    elif source == "oracle":
        optimal_set, optimal_value = brute_force_oracle(spec)
        plans = sorted(optimal_set, key=_plan_str)
    else:
        plans = [load_plan(source, spec.T)]
    rows = []
    for plan in plans:
        check_plan(spec, plan)
        res = simulate_slotted(spec, plan, method=params["method"],
                               replications=int(params["mc_replications"]))
        if optimal_value is not None:
            optimal = exact_value(spec, plan) == optimal_value
        else:
            optimal = None
        label = _plan_str(plan)
        rows.append((label, "value", res.value))
        if res.method == "monte_carlo":
            rows.append((label, "stderr", res.stderr))
        if optimal is not None:
            rows.append((label, "optimal", float(optimal)))
    return rows


def validate_cells(config: ExperimentConfig) -> None:
    """Build every cell's model objects once so bad values fail before any run."""
    for c, params in enumerate(config.cells()):
        try:
            if config.kind == "game":
                GameSpec(lam=float(params["lam"]), k=float(params["k"]),
                         noise=float(params["noise"]), c_t=float(params["c_t"]),
                         c_i=float(params["c_i"]), rate_model=params["rate_model"],
                         objective=params["objective"])
            elif config.kind == "slotted":
                spec = SlottedSpec(T=int(params["T"]), N=int(params["N"]),
                                   alpha=float(params["alpha"]), variant=params["variant"],
                                   n_sub=int(params["n_sub"]), scheduler=params["scheduler"])
                if params["method"] not in ("exact", "monte_carlo"):
                    raise ValueError("method must be 'exact' or 'monte_carlo'")
                if params["plan"] not in ("central", "oracle"):
                    check_plan(spec, load_plan(params["plan"], spec.T))
            else:
                scenario_from_params(params, config.seed)
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"cell {c}: {exc}") from None


def run_cell(kind: str, params: dict, seed: int, per_node: bool = False):
    if kind == "game":
        return _game_rows(params)
    if kind == "slotted":
        return _slotted_rows(params, seed)
    return _gossip_rows(params, seed, per_node)


def _task(args):
    kind, params, seed, per_node = args
    try:
        return run_cell(kind, params, seed, per_node), None
    except Exception as exc:  # recorded per cell, the sweep continues
        return [], f"{type(exc).__name__}: {exc}"


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> dict:
    """Run grid x replications; write results and manifest to ``config.out_dir``.

    Returns the manifest. Rows are ordered by (cell, replication) regardless of
    completion order.
    """
    start = time.time()
    validate_cells(config)
    cells = config.cells()
    reps = 1 if config.kind == "game" else config.replications
    tasks, index = [], []
    for c, params in enumerate(cells):
        for r in range(reps):
            tasks.append((config.kind, params, config.seed ^ r, config.per_node))
            index.append((c, r))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_task, tasks))
    else:
        outcomes = [_task(t) for t in tasks]

    keys = list(config.grid)
    header = ["experiment", "cell", *keys, "replication", "seed", "scope", "metric", "value"]
    records, errors = [], []
    for (c, r), task, (rows, err) in zip(index, tasks, outcomes):
        seed = task[2]
        if err:
            errors.append({"cell": c, "replication": r, "error": err})
        for scope, metric, value in rows:
            records.append([config.kind, c, *(cells[c][k] for k in keys), r, seed, scope, metric,
                            value])

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if config.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for rec in records:
            w.writerow([*rec[:-1], format_value(rec[-1])])
        (out / "results.csv").write_text(buf.getvalue())
    else:
        payload = [dict(zip(header, rec)) for rec in records]
        (out / "results.json").write_text(json.dumps(payload, indent=1) + "\n")

    manifest = {
        "config": config.to_dict(),
        "seeds": sorted({t[2] for t in tasks}),
        "cells": len(cells),
        "code_version": __version__,
        "wall_time_s": round(time.time() - start, 3),
        "errors": errors,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest


def config_from_manifest(manifest: dict) -> ExperimentConfig:
    return ExperimentConfig.from_dict(manifest["config"])


def results_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
