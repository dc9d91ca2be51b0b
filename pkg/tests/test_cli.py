# -*- coding: utf-8 -*-
import io
import json
from collections import defaultdict

import numpy as np
import pytest

from zidlab_pkg.cli import main, int_list
from zidlab_pkg.cli.output import read_provenance, read_csv_rows, csv_body
from zidlab_pkg.tabular import delay_trend


def _run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], stdout=out)
    return code, out.getvalue()


def _result(path):
    return json.loads(path.read_text())["result"]


def test_int_list():
    assert int_list("1,2,5") == [1, 2, 5]
    assert int_list("1..4") == [1, 2, 3, 4]
    assert int_list("0, 3..4") == [0, 3, 4]


def test_analyze(tmp_path, maps_dir):
    code, out = _run("--out", tmp_path, "analyze", maps_dir / "chain.map")
    assert code == 0
    assert "density: 1/5" in out
    result = _result(tmp_path / "analyze.json")
    assert result["edges"] == 5
    assert result["cut_size"] == 1
    files = _result(tmp_path / "run.json")["files"]
    assert files == ["analyze.json"]


@pytest.mark.parametrize("name, line", [
    ("density.map", "density: 3/101"),
    ("two_lasers.map", "is_zid: True"),
    ("rewarded_lasers.map", "is_zid: False"),
])
def test_analyze_shipped_maps(tmp_path, maps_dir, name, line):
    code, out = _run("--out", tmp_path, "analyze", maps_dir / name)
    assert code == 0
    assert line in out.splitlines()



def test_analyze_measures_incentive_delay(tmp_path):
    room = tmp_path / "beam_room.map"
    room.write_text(".   S0 .\nL0E .  .\n.   X  .\n")
    code, out = _run("--out", tmp_path / "shaped", "analyze", room, "--traces", 300,
                     "--trace-horizon", 30, "--d", 3)
    assert code == 0
    assert any(line.startswith("incentive: delayed") for line in out.splitlines())
    incentive = _result(tmp_path / "shaped" / "analyze.json")["incentive"]
    assert list(incentive["delays"]) == ["4"]

    code, out = _run("--out", tmp_path / "plain", "analyze", room, "--traces", 300)
    assert code == 0
    assert any(line.startswith("incentive: zero") for line in out.splitlines())


def test_analyze_without_winning_walk(tmp_path):
    closed = tmp_path / "closed.map"
    closed.write_text("S0 @ X\n")
    code, _ = _run("--out", tmp_path, "analyze", closed)
    assert code == 2
    assert _result(tmp_path / "analyze.json")["winning_walk"] is False


def test_invalid_inputs_exit_1(tmp_path, maps_dir, capsys):
    bad = tmp_path / "bad.map"
    bad.write_text("S0 . .\n")
    assert _run("--out", tmp_path, "analyze", bad)[0] == 1
    assert "no exit" in capsys.readouterr().err
    assert _run("--out", tmp_path, "analyze", tmp_path / "missing.map")[0] == 1
    assert _run("analyze")[0] == 1
    assert _run("frobnicate")[0] == 1
    assert _run("--out", tmp_path, "analyze", maps_dir / "density.map", "--variant", "9")[0] == 1


def test_bad_config_exits_1(tmp_path, maps_dir):
    config = tmp_path / "zidlab.toml"
    config.write_text("[output]\nthreads = 2\nmystery = 1\n")
    assert _run("--config", config, "analyze", maps_dir / "chain.map")[0] == 1


def test_enumerate(tmp_path, maps_dir):
    code, out = _run("--out", tmp_path, "enumerate", maps_dir / "chain.map")
    assert code == 0
    graph = _result(tmp_path / "graph.json")
    assert len(graph["vertices"]) == 3
    assert len(graph["edges"]) == 5


def test_explore_records_provenance(tmp_path, maps_dir):
    code, _ = _run("--out", tmp_path, "--seed", 3, "explore", maps_dir / "chain.map",
                   "--horizon", 4, "--steps", 100)
    assert code == 0
    path = tmp_path / "explore.csv"
    config = read_provenance(path)
    assert config["command"] == "explore"
    assert config["output"]["seed"] == 3
    assert config["explore"]["step_budget"] == 100
    row, = read_csv_rows(path)
    assert row["horizon"] == "4"
    assert int(row["episodes"]) > 0
    assert float(row["exit_rate"]) == pytest.approx(int(row["exits"]) / int(row["episodes"]))

    code, out = _run("provenance", path)
    assert code == 0
    assert json.loads(out) == config


def test_json_format(tmp_path, maps_dir):
    code, _ = _run("--out", tmp_path, "--format", "json", "explore", maps_dir / "chain.map",
                   "--steps", 50)
    assert code == 0
    rows = _result(tmp_path / "explore.json")
    assert len(rows) == 1
    assert rows[0]["map"] == "chain"


DENSITY_ARGS = ("--variants", "0,1", "--horizons", "12", "--steps", 400, "--seeds", "0..2")


def test_density_experiment_oracle_only(tmp_path, maps_dir):
    code, out = _run("--out", tmp_path, "density-experiment", "--map",
                     maps_dir / "density.map", "--variants", "0..4", "--horizons", "12..14",
                     "--oracle-only")
    assert code == 0
    rows = read_csv_rows(tmp_path / "density_oracle.csv")
    assert len(rows) == 15
    assert rows[0]["density_exact"] == "3/101"
    assert not (tmp_path / "density_runs.csv").exists()
    assert "P(exit)" in out


def test_threads_do_not_change_results(tmp_path, maps_dir, monkeypatch):
    outputs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("ZIDLAB_THREADS", threads)
        out_dir = tmp_path / threads
        code, _ = _run("--out", out_dir, "density-experiment", "--map",
                       maps_dir / "density.map", *DENSITY_ARGS)
        assert code == 0
        outputs.append([csv_body(out_dir / name)
                        for name in ("density_oracle.csv", "density_runs.csv")])
    assert outputs[0] == outputs[1]
    assert len(read_csv_rows(tmp_path / "1" / "density_runs.csv")) == 6


def test_svg_output(tmp_path, maps_dir):
    code, _ = _run("--out", tmp_path, "--format", "svg", "density-experiment", "--map",
                   maps_dir / "density.map", *DENSITY_ARGS)
    assert code == 0
    svg = tmp_path / "density.svg"
    assert svg.read_text().lstrip().startswith("<?xml")
    assert read_provenance(svg) == read_provenance(tmp_path / "density_runs.csv")


def test_delay_experiment(tmp_path, maps_dir):
    code, out = _run("--out", tmp_path, "delay-experiment", "--map",
                     maps_dir / "two_lasers.map", "--d", "0,2", "--seeds", "0,1",
                     "--steps", 600, "--eval-interval", 300)
    assert code == 0
    summary = read_csv_rows(tmp_path / "delay_summary.csv")
    assert [r["condition"] for r in summary] == ["no-shaping", "d=0", "d=2"]
    curves = read_csv_rows(tmp_path / "delay_curves.csv")
    assert len(curves) == 3 * 2 * 2
    assert read_provenance(tmp_path / "delay_curves.csv")["learning"]["delays"] == [0, 2]
    assert "spearman" in out


def test_delay_experiment_flags(tmp_path, maps_dir):
    code, _ = _run("--out", tmp_path, "delay-experiment", "--map",
                   maps_dir / "two_lasers.map", "--d", "1", "--seeds", "0", "--steps", 300,
                   "--eval-interval", 300, "--no-baseline", "--strict-paper-sign", "--no-flush")
    assert code == 0
    config = read_provenance(tmp_path / "delay_summary.csv")
    assert config["shaping"]["strict_paper_sign"] is True
    assert config["shaping"]["flush_on_truncation"] is False
    assert config["learning"]["baseline"] is False
    assert [r["condition"] for r in read_csv_rows(tmp_path / "delay_summary.csv")] == ["d=1"]



def test_sign_flag_alias(tmp_path, maps_dir):
    code, _ = _run("--out", tmp_path, "delay-experiment", "--map",
                   maps_dir / "two_lasers.map", "--d", "0", "--seeds", "0", "--steps", 300,
                   "--eval-interval", 300, "--no-baseline", "--reverse-shaping-sign")
    assert code == 0
    assert read_provenance(tmp_path / "delay_summary.csv")["shaping"]["strict_paper_sign"] is True

def test_discover(tmp_path, maps_dir):
    code, out = _run("--out", tmp_path, "discover", "--map", maps_dir / "doorway.map",
                     "--agents", "1", "--steps", 1500)
    assert code == 0
    assert len(read_csv_rows(tmp_path / "discovery_heatmap.csv")) == 60
    timing, = read_csv_rows(tmp_path / "discovery_timing.csv")
    assert timing["n_agents"] == "1"
    assert out.startswith("n=1: top cell")


def test_discover_recent_graph(tmp_path, maps_dir):
    code, _ = _run("--out", tmp_path, "discover", "--map", maps_dir / "doorway.map",
                   "--agents", "1", "--steps", 1000, "--local-graph", "recent")
    assert code == 0
    assert read_provenance(tmp_path / "discovery_heatmap.csv")["discovery"]["local_graph"] == "recent"


def test_provenance_of_plain_file(tmp_path):
    plain = tmp_path / "notes.csv"
    plain.write_text("a,b\n1,2\n")
    assert _run("provenance", plain)[0] == 1


@pytest.mark.slow
def test_discover_svg(tmp_path, maps_dir):
    code, _ = _run("--out", tmp_path, "--format", "svg", "discover", "--map",
                   maps_dir / "doorway.map", "--agents", "1,2", "--steps", 1500, "--runs", 2)
    assert code == 0
    assert (tmp_path / "heatmap_n2.svg").exists()
    assert len(read_csv_rows(tmp_path / "discovery_timing.csv")) == 4


@pytest.mark.slow
def test_delay_experiment_orders_conditions(tmp_path, maps_dir, monkeypatch):
    monkeypatch.setenv("ZIDLAB_THREADS", "4")
    code, _ = _run("--out", tmp_path, "delay-experiment", "--map",
                   maps_dir / "laser_corridor.map")
    assert code == 0
    summary = {r["condition"]: r for r in read_csv_rows(tmp_path / "delay_summary.csv")}
    assert len(summary) == 6
    for d in range(5):
        assert float(summary[f"d={d}"]["p_vs_baseline"]) < 0.05

    rates = defaultdict(list)
    for row in read_csv_rows(tmp_path / "delay_curves.csv"):
        rates[row["condition"], row["seed"]].append(float(row["exit_rate"]))
    aucs = {d: [np.mean(rates[f"d={d}", str(seed)]) for seed in range(20)] for d in range(5)}
    rho, p = delay_trend(aucs)
    assert rho < 0
    assert p < 0.05
