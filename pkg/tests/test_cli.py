"""End-to-end command-line checks: exit codes, stdout contract, artifacts.

Every command prints exactly one JSON object on stdout (logs go to stderr),
and any report path gets a sibling PNG figure next to the delimited file.
"""

import json

import pytest

from rwdre.cli import main

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_simulate_writes_report_and_figure(tmp_path, capsys):
    out = tmp_path / "walk.csv"
    code, summary = run_cli(
        capsys, "simulate", "--steps", "100", "--seed", "4", "--out", str(out)
    )
    assert code == 0
    assert summary["command"] == "simulate"
    assert summary["steps"] == 100
    assert summary["endpoint"] == pytest.approx(summary["speed"] * 100)
    rows = out.read_text().splitlines()
    assert len(rows) == 101  # one per time, no header
    assert rows[0] == "0,0"
    png = tmp_path / "walk.png"
    assert png.read_bytes()[:8] == PNG_MAGIC
    assert summary["files"] == [str(out), str(png)]


def test_simulate_reruns_byte_identical(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path in (a, b):
        code, _ = run_cli(
            capsys, "simulate", "--steps", "200", "--seed", "9", "--out", str(path)
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_jsonl_format(tmp_path, capsys):
    out = tmp_path / "walk.jsonl"
    code, _ = run_cli(
        capsys, "simulate", "--steps", "10", "--format", "jsonl", "--out", str(out)
    )
    assert code == 0
    first = json.loads(out.read_text().splitlines()[0])
    assert first == {"t": 0, "x": 0}


def test_simulate_empty_interval_scan(capsys):
    code, summary = run_cli(
        capsys, "simulate", "--steps", "10", "--rho", "0.4", "--ell", "2"
    )
    assert code == 0
    scan = summary["empty_interval"]
    assert scan["ell"] == 2
    assert scan["x_minus"] % 2 == 0


def test_bad_parameter_exits_2(capsys):
    code = main(["simulate", "--steps", "10", "--p-circ", "1.5"])
    captured = capsys.readouterr()
    assert code == 2
    assert captured.out == ""
    assert "p_circ" in captured.err


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"steps": 10, "bogus": 1}))
    code = main(["simulate", "--config", str(cfg)])
    assert code == 2
    assert "bogus" in capsys.readouterr().err


def test_flags_override_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"steps": 10, "seed": 3}))
    code, summary = run_cli(
        capsys, "simulate", "--config", str(cfg), "--steps", "20"
    )
    assert code == 0
    assert summary["steps"] == 20
    assert summary["params"]["seed"] == 3


def test_ghost_matches_simulate_in_empty_environment(capsys):
    code, walk = run_cli(capsys, "simulate", "--steps", "50", "--rho", "0", "--seed", "2")
    assert code == 0
    code, ghost = run_cli(capsys, "ghost", "--steps", "50", "--rho", "0", "--seed", "2")
    assert code == 0
    assert ghost["command"] == "ghost"
    assert ghost["endpoint"] == walk["endpoint"]


def test_infection_summary(tmp_path, capsys):
    out = tmp_path / "front.csv"
    code, summary = run_cli(
        capsys, "infection", "--rho", "1.0", "--horizon", "80",
        "--seed", "5", "--out", str(out)
    )
    assert code == 0
    assert summary["horizon"] == 80
    assert summary["infected"] >= 1
    assert len(out.read_text().splitlines()) == 81
    assert (tmp_path / "front.png").exists()


def test_oracle_poisson_route(capsys):
    code, summary = run_cli(
        capsys, "oracle", "--rho", "0.5", "--p-circ", "0.8", "--p-bullet", "0.3",
        "--replicas", "3000"
    )
    assert code == 0
    assert summary["method"] == "path-expansion"
    assert summary["n"] == 4  # the oracle's own default, not the global one
    total = sum(summary["pmf"].values())
    assert total == pytest.approx(1.0, abs=1e-9)
    assert summary["mc_replicas"] == 3000
    assert summary["tv_monte_carlo"] < 0.05


def test_oracle_config_route_with_monte_carlo(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"particles": {"0": 1, "2": 1}, "steps": 3}))
    code, summary = run_cli(
        capsys, "oracle", "--config", str(cfg), "--replicas", "20000", "--seed", "1"
    )
    assert code == 0
    assert summary["method"] == "joint-chain-dp"
    assert summary["mc_replicas"] == 20000
    assert summary["tv_monte_carlo"] < 0.02


def test_regen_insufficient_exits_1(capsys):
    # a sub-ballistic walker in a dense environment produces no regenerations
    code, summary = run_cli(
        capsys, "regen", "--horizon", "60", "--rho", "2.0", "--p-circ", "0.55",
        "--seed", "77"
    )
    assert code == 1
    assert summary["sufficient"] is False
    assert summary["cycles"] < 10


def test_regen_sufficient_run(tmp_path, capsys):
    out = tmp_path / "waits.csv"
    code, summary = run_cli(
        capsys, "regen", "--horizon", "1500", "--replicas", "80",
        "--seed", "20", "--out", str(out)
    )
    assert code == 0
    assert summary["sufficient"] is True
    assert summary["cycles"] >= 80
    assert "ks_halves" in summary["diagnostics"]
    assert out.read_text().startswith("t,survival\n")
    assert (tmp_path / "waits.png").read_bytes()[:8] == PNG_MAGIC


def test_sweep_end_to_end(tmp_path, capsys):
    base = tmp_path / "grid"
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({
        "rho": [0.0, 0.5], "p_circ": [0.7, 0.9], "n": 50, "replicas": 12,
        "out": str(base),
    }))
    code, summary = run_cli(capsys, "sweep", "--config", str(cfg), "--workers", "2")
    assert code == 0
    manifest = json.load(open(str(base) + ".manifest.json"))
    lines = open(str(base) + ".jsonl").read().splitlines()
    assert len(lines) == 4
    assert summary["rows_sha256"] == manifest["rows_sha256"]
    assert (tmp_path / "grid.png").read_bytes()[:8] == PNG_MAGIC


def test_verify_quick(capsys):
    code, summary = run_cli(capsys, "verify", "--quick", "--seed", "11")
    assert code == 0
    suites = {s["name"]: s for s in summary["suites"]}
    assert set(suites) == {
        "start-monotonicity", "environment-monotonicity", "ghost-domination",
        "infection-domination", "oracle-agreement",
    }
    assert all(s["violations"] == 0 for s in suites.values())
