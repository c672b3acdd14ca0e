import csv
import json
import subprocess
import sys
from collections import defaultdict

import pytest

from agelab.cli import main
from agelab.experiments import (ConfigError, ExperimentConfig, config_from_manifest,
                                results_table, run_experiment)


def write_config(path, **d):
    path.write_text(json.dumps(d))
    return str(path)


def test_scaling_rows_per_metric(tmp_path):
    cfg = ExperimentConfig("scaling", grid={"n": [8, 16, 32]}, replications=5,
                           out_dir=str(tmp_path))
    run_experiment(cfg)
    rows = results_table(tmp_path / "results.csv")
    counts = defaultdict(int)
    for r in rows:
        counts[r["metric"]] += 1
    assert counts["mean_age"] == 15 and counts["median_age"] == 15
    assert list(rows[0]) == ["experiment", "cell", "n", "replication", "seed", "scope",
                             "metric", "value"]


def test_csv_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path / "c.json", experiment="timestomp",
                       grid={"n": [8, 16], "q_in": [1.0, 0.2]}, replications=3, seed=5)
    assert main(["timestomp", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["timestomp", "--config", cfg, "--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    assert (tmp_path / "a/results.csv").read_bytes() == (tmp_path / "b/results.csv").read_bytes()


def test_manifest_round_trip(tmp_path):
    cfg = ExperimentConfig("jamming", grid={"n": [16, 32]}, params={"jammers": 2},
                           replications=2, seed=9, out_dir=str(tmp_path))
    manifest = run_experiment(cfg)
    on_disk = json.loads((tmp_path / "manifest.json").read_text())
    assert on_disk["seeds"] == [8, 9]
    assert on_disk["config"]["params"]["warmup_fraction"] == 0.2
    assert on_disk["config"]["params"]["confidence"] == 0.95
    assert {"code_version", "wall_time_s", "errors"} <= set(on_disk)
    assert config_from_manifest(on_disk) == cfg
    assert config_from_manifest(manifest) == cfg


@pytest.mark.parametrize("bad", [
    {"experiment": "scaling", "grid": {"n": []}},
    {"experiment": "scaling", "grid": {"bogus": [1]}},
    {"experiment": "scaling", "replications": 0},
    {"experiment": "scaling", "params": {"n": 0}},
    {"experiment": "nonsense"},
    {"grid": {"n": [8]}},
])
def test_invalid_config_exits_2(tmp_path, bad):
    cfg = write_config(tmp_path / "bad.json", **bad)
    assert main(["scaling", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_unparseable_config_exits_2(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["scaling", "--config", str(p)]) == 2


def test_missing_config_exits_3(tmp_path):
    assert main(["scaling", "--config", str(tmp_path / "nope.json")]) == 3


def test_unwritable_output_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["simulate", "--set", "n=4", "--out", str(blocker / "sub")]) == 3


def test_cell_errors_are_recorded(tmp_path, monkeypatch):
    import agelab.experiments as ex

    def boom(params, seed, per_node):
        if params["n"] == 16:
            raise RuntimeError("boom")
        return [("network", "mean_age", 1.0)]

    monkeypatch.setattr(ex, "_gossip_rows", boom)
    cfg = ExperimentConfig("scaling", grid={"n": [8, 16]}, replications=2, out_dir=str(tmp_path))
    manifest = run_experiment(cfg)
    assert [e["cell"] for e in manifest["errors"]] == [1, 1]
    assert len(results_table(tmp_path / "results.csv")) == 2


def test_mutation_sweep_dips(tmp_path):
    cfg = ExperimentConfig("mutation", grid={"gossip_rate": [0.1, 1.0, 10.0]},
                           replications=20, seed=20240, out_dir=str(tmp_path))
    run_experiment(cfg)
    f = defaultdict(list)
    for r in results_table(tmp_path / "results.csv"):
        if r["metric"] == "fraction_accurate":
            f[float(r["gossip_rate"])].append(float(r["value"]))
    mean = {k: sum(v) / len(v) for k, v in f.items()}
    assert mean[1.0] < mean[0.1] and mean[1.0] < mean[10.0]


def test_json_format(tmp_path):
    assert main(["simulate", "--set", "n=4", "--format", "json", "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "results.json").read_text())
    assert {r["metric"] for r in payload} == {"mean_age", "median_age"}


def test_plot_age_vs_n(tmp_path):
    assert main(["scaling", "--grid", "n=8,16,32", "--grid", "topology=bi_ring,fully_connected",
                 "--reps", "2", "--out", str(tmp_path)]) == 0
    svg = tmp_path / "age.svg"
    assert main(["plot", str(tmp_path / "results.csv"), "--kind", "age_vs_n",
                 "--out", str(svg)]) == 0
    text = svg.read_text()
    assert text.startswith("<?xml") and "<svg" in text


def test_plot_f_vs_rate(tmp_path):
    assert main(["mutation", "--grid", "gossip_rate=0.1,1,10", "--set", "n=8", "--set",
                 "horizon=100", "--reps", "2", "--out", str(tmp_path)]) == 0
    svg = tmp_path / "f.svg"
    assert main(["plot", str(tmp_path / "results.csv"), "--kind", "f_vs_rate",
                 "--out", str(svg)]) == 0
    assert svg.exists()


def test_plot_empty_csv_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("experiment,cell,n,replication,seed,scope,metric,value\n")
    svg = tmp_path / "x.svg"
    assert main(["plot", str(empty), "--kind", "age_vs_n", "--out", str(svg)]) == 2
    assert not svg.exists()


def test_plot_column_mismatch(tmp_path):
    assert main(["game", "--out", str(tmp_path)]) == 0
    assert main(["plot", str(tmp_path / "results.csv"), "--kind", "age_vs_n",
                 "--out", str(tmp_path / "x.svg")]) == 2


def test_game_cli_table(tmp_path, capsys):
    assert main(["game", "--k", "2", "--c-t", "1", "--c-i", "1", "--out", str(tmp_path),
                 "--table", "csv"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    ne = next(r for r in rows if r["equilibrium"] == "NE")
    assert float(ne["p"]) == pytest.approx(1.0) and float(ne["q"]) == pytest.approx(1.0)
    tl = next(r for r in rows if r["equilibrium"] == "SE_transmitter_leader")
    assert tl["exists"] == "no"


def test_slotted_cli_oracle(tmp_path, capsys):
    assert main(["slotted", "--T", "8", "--N", "2", "--alpha", "0.25", "--plan", "oracle",
                 "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert {r["plan"] for r in rows} == {"-,-,-,0,0,-,-,-", "-,-,-,1,1,-,-,-"}
    assert all(r["optimal"] == "1" for r in rows)


def test_slotted_cli_plan_file(tmp_path, capsys):
    plan = tmp_path / "plan.txt"
    plan.write_text("0,-,-,-,-,-,-,-\n")
    assert main(["slotted", "--plan", str(plan), "--out", str(tmp_path)]) == 0
    assert "0,-,-,-,-,-,-,-" in capsys.readouterr().out
    plan.write_text("0,0,0,-,-,-,-,-\n")
    assert main(["slotted", "--plan", str(plan), "--out", str(tmp_path)]) == 2


def test_config_kind_must_match_subcommand(tmp_path):
    cfg = write_config(tmp_path / "c.json", experiment="game")
    assert main(["slotted", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_bad_set_syntax(tmp_path):
    assert main(["simulate", "--set", "n", "--out", str(tmp_path)]) == 2


def test_check_subset_exit_codes():
    assert main(["check", "--only", "9,10"]) == 0
    assert main(["check", "--only", "99"]) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "agelab", "game", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "NE" in out.stdout


def test_from_dict_rejects_unknown_fields():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "game", "colour": "blue"})
