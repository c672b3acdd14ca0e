"""Command-line entry point: ``agelab <subcommand> [flags]``.

Exit codes: 0 success, 2 bad configuration, 3 I/O failure, 4 acceptance failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .experiments import ConfigError, ExperimentConfig, run_experiment

EXPERIMENTS = ("simulate", "scaling", "timestomp", "jamming", "mutation", "game", "slotted")

# subcommand-specific flags that map straight onto config params
GAME_FLAGS = {"lam": "lam", "k": "k", "noise": "noise", "c_t": "c_t", "c_i": "c_i",
              "rate_model": "rate_model", "objective": "objective"}
SLOTTED_FLAGS = {"T": "T", "N": "N", "alpha": "alpha", "variant": "variant", "n_sub": "n_sub",
                 "scheduler": "scheduler", "plan": "plan", "victim": "victim",
                 "method": "method"}


def _value(text: str):
    """JSON literal if it parses, else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _pair(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"expected key=value, got {text!r}")
    return key.strip(), value


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--format", choices=("csv", "json"), help="results file format")
    p.add_argument("--reps", type=int, help="replications per grid cell")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="fix a parameter (repeatable)")
    p.add_argument("--grid", action="append", default=[], metavar="KEY=V1,V2",
                   help="sweep a parameter (repeatable)")
    p.add_argument("--per-node", action="store_true", help="also write per-node ages")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, parents=[common], help=f"run a {name} experiment")
        if name == "game":
            sp.add_argument("--lam", type=float)
            sp.add_argument("--k", type=float)
            sp.add_argument("--noise", type=float)
            sp.add_argument("--c-t", dest="c_t", type=float)
            sp.add_argument("--c-i", dest="c_i", type=float)
            sp.add_argument("--rate-model", choices=("linear", "log"))
            sp.add_argument("--objective", choices=("peak", "average"))
            sp.add_argument("--table", choices=("text", "csv"), default="text",
                            help="stdout table style")
        elif name == "slotted":
            sp.add_argument("--T", type=int)
            sp.add_argument("--N", type=int)
            sp.add_argument("--alpha", type=float)
            sp.add_argument("--variant", choices=("per_user", "sub_carrier"))
            sp.add_argument("--n-sub", dest="n_sub", type=int)
            sp.add_argument("--scheduler", choices=("round_robin", "uniform_random", "max_age"))
            sp.add_argument("--plan", help="central, oracle or a plan file")
            sp.add_argument("--victim", type=int)
            sp.add_argument("--method", choices=("exact", "monte_carlo"))

    sp = sub.add_parser("plot", help="render an SVG from a results CSV")
    sp.add_argument("csv")
    sp.add_argument("--kind", required=True, choices=("age_vs_n", "f_vs_rate"))
    sp.add_argument("--out", required=True, help="SVG path")
    sp.add_argument("--x", help="x column (default depends on kind)")

    sp = sub.add_parser("check", help="run the acceptance criteria")
    sp.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def config_from_args(args) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.load(args.config)
        if config.kind != args.command:
            raise ConfigError(f"config is a {config.kind!r} experiment, not {args.command!r}")
        d = config.to_dict()
    else:
        d = {"experiment": args.command, "params": {}, "grid": {}}
    params, grid = dict(d.get("params", {})), dict(d.get("grid", {}))
    flags = GAME_FLAGS if args.command == "game" else SLOTTED_FLAGS if args.command == "slotted" else {}
    for attr, key in flags.items():
        if getattr(args, attr, None) is not None:
            params[key] = getattr(args, attr)
    for item in args.set:
        key, value = _pair(item)
        params[key] = _value(value)
    for item in args.grid:
        key, values = _pair(item)
        grid[key] = [_value(v) for v in values.split(",")]
        params.pop(key, None)
    d["params"], d["grid"] = params, grid
    for attr, key in (("out", "out_dir"), ("seed", "seed"), ("reps", "replications"),
                      ("format", "format")):
        if getattr(args, attr) is not None:
            d[key] = getattr(args, attr)
    if args.per_node:
        d["per_node"] = True
    return ExperimentConfig.from_dict(d)


def _print_game(config: ExperimentConfig, style: str) -> None:
    path = f"{config.out_dir}/results.csv"
    if config.format != "csv":
        return
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    keys = list(config.grid)
    table: dict[tuple, dict[str, str]] = {}
    for r in rows:
        table.setdefault((r["cell"], *(r[k] for k in keys), r["scope"]), {})[r["metric"]] = r["value"]
    header = ["cell", *keys, "equilibrium", "p", "q", "u_t", "u_i", "exists"]
    lines = [header]
    for key, m in table.items():
        lines.append([*key, *(m.get(c, "") for c in ("p", "q", "u_t", "u_i"))]
                     + ["yes" if m.get("exists") == "1" else "no"])
    if style == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerows(lines)
    else:
        widths = [max(len(str(row[i])) for row in lines) for i in range(len(header))]
        for row in lines:
            print("  ".join(str(v).ljust(w) for v, w in zip(row, widths)).rstrip())


def _print_slotted(config: ExperimentConfig) -> None:
    if config.format != "csv":
        return
    with open(f"{config.out_dir}/results.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    table: dict[tuple, dict[str, str]] = {}
    for r in rows:
        table.setdefault((r["cell"], r["replication"], r["scope"]), {})[r["metric"]] = r["value"]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["cell", "replication", "plan", "value", "optimal"])
    for (cell, rep, plan), m in table.items():
        w.writerow([cell, rep, plan, m["value"], m.get("optimal", "")])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            from .acceptance import CRITERIA, run_all
            only = None
            if args.only:
                only = [int(x) for x in args.only.split(",")]
                bad = [x for x in only if x not in CRITERIA]
                if bad:
                    raise ConfigError(f"unknown criteria {bad}")
            results = run_all(only)
            failed = [c.number for c in results if not c.passed]
            print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
            return 4 if failed else 0
        if args.command == "plot":
            from .plotting import emit_plot
            emit_plot(args.csv, args.kind, args.out, x=args.x)
            return 0
        config = config_from_args(args)
        manifest = run_experiment(config, jobs=max(1, args.jobs))
        for err in manifest["errors"]:
            print(f"cell {err['cell']} replication {err['replication']}: {err['error']}",
                  file=sys.stderr)
        if args.command == "game":
            _print_game(config, args.table)
        elif args.command == "slotted":
            _print_slotted(config)
        else:
            print(f"wrote {config.out_dir}/results.{config.format} "
                  f"({manifest['cells']} cells, {manifest['wall_time_s']} s)")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        # plot column mismatches and similar input problems
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
