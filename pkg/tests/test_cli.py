import json

import numpy as np
import pytest

from regshb.cli import load_config, main, parse_config
from regshb.cli.checks import run_checks
from regshb.errors import ConfigError
from regshb.operators.export import read_array
from regshb.solver import Mode, read_trace_binary


def test_presets_parse():
    for name in ("fredholm", "tomo", "tomo-scaled", "schlieren"):
        rc = parse_config({"preset": name})
        assert rc.preset == name and rc.solver().name == rc.solve_solver


def test_fredholm_preset_defaults():
    rc = parse_config({"preset": "fredholm"})
    names = [s.name for s in rc.spec.solvers]
    assert names == ["sgd", "shb_1e-05_1e-04", "shb_1e-05_1e-05", "shb_1e-06_1e-05"]
    assert rc.spec.levels == (0.5, 0.1, 0.05, 0.01) and rc.spec.trials == 100
    sgd = rc.solver("sgd")
    assert sgd.mode is Mode.SGD and sgd.cfg.beta_cap == 0.0
    assert rc.solver("shb_1e-06_1e-05").cfg.tau == 1.2


def test_overrides():
    rc = parse_config({"preset": "fredholm"},
                      ["tau=1.5", "noise.levels=[0.2]", "problem.n=40", "trials=2", "seed=9"])
    assert all(s.cfg.tau == 1.5 for s in rc.spec.solvers)
    assert rc.spec.levels == (0.2,) and rc.spec.problem.n == 40
    assert rc.spec.base_seed == 9 and rc.spec.trials == 2


@pytest.mark.parametrize("doc,over,key", [
    ({"preset": "fredholm"}, ["mu2=3"], "mu2"),
    ({"preset": "nope"}, [], "preset"),
    ({}, [], "preset"),
    ({"preset": "fredholm", "extra": 1}, [], "extra"),
    ({"preset": "fredholm"}, ["problem.grid_n=4"], "grid_n"),
    ({"preset": "fredholm"}, ["noise.model=poisson"], "noise.model"),
    ({"preset": "fredholm"}, ["mu0=5"], "mu0"),
    ({"preset": "fredholm"}, ["trials=0"], "trials"),
    ({"preset": "fredholm"}, ["solve.solver=missing"], "solve.solver"),
    ({"preset": "fredholm"}, ["seed=-1"], "seed"),
])
def test_config_errors(doc, over, key):
    with pytest.raises(ConfigError, match=key):
        parse_config(doc, over)


def test_load_config_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("preset: fredholm\nproblem: {n: 50}\nsolvers:\n"
                 "  - {name: a, mode: shb, upsilon0: 1.0e-6, upsilon1: 1.0e-5}\n"
                 "solve: {solver: a}\n")
    rc = load_config(p)
    assert [s.name for s in rc.spec.solvers] == ["a"]
    with pytest.raises(ConfigError, match="preset"):
        load_config(p, preset="tomo")
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.yaml")


def test_solve_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["solve", "fredholm", "--set", "problem.n=60", "--noise", "0.1",
                 "--seed", "1", "--out", str(out)]) == 0
    rec = json.loads((out / "record.json").read_text())
    assert rec["stop_reason"] == "stopping_rule" and rec["discrepancy_ok"]
    lines = (out / "trace.jsonl").read_text().splitlines()
    assert len(lines) == rec["iterations"] + 1
    assert read_trace_binary(out / "trace.bin").shape == (rec["iterations"],)
    assert read_array(out / "reconstruction").shape == (60,)
    assert "wall_time" in json.loads((out / "timing.json").read_text())


def test_solve_is_deterministic(tmp_path):
    args = ["solve", "fredholm", "--set", "problem.n=60", "--noise", "0.05", "--seed", "4"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    for f in ("trace.jsonl", "trace.bin", "reconstruction.bin", "record.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_bench(tmp_path):
    out = tmp_path / "b"
    assert main(["bench", "fredholm", "--set", "problem.n=60", "--set", "trials=2",
                 "--set", "noise.levels=[0.1]", "--workers", "1", "--out", str(out)]) == 0
    assert len((out / "results.csv").read_text().splitlines()) == 5
    doc = json.loads((out / "results.json").read_text())
    assert len(doc["cells"]) == 4


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["solve", "fredholm", "--set", "mu2=3", "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError" and "mu2" in err["message"]


def test_check_command(tmp_path):
    assert main(["check", "--out", str(tmp_path), "step_rules", "total_variation"]) == 0
    doc = json.loads((tmp_path / "check.json").read_text())
    assert [d["name"] for d in doc] == ["step_rules", "total_variation"]


def test_all_checks_pass():
    results = run_checks()
    assert len(results) == 10
    assert [n for n, ok, _ in results if not ok] == []


def test_export(tmp_path):
    assert main(["export-problem", "fredholm", "--set", "problem.n=30",
                 "--out", str(tmp_path)]) == 0
    x = read_array(tmp_path / "x_dagger")
    assert x.shape == (30,) and (tmp_path / "matrix.json").exists()
