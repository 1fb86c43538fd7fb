import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regshb.errors import ConfigError, InputError
from regshb.harness import (CSV_COLUMNS, ExperimentSpec, FredholmProblem, SchlierenProblem,
                            SolverEntry, TomoProblem, TrialResult, TrialStats, boxplot_stats,
                            build, discrepancy_check, make_data, monte_carlo, read_csv,
                            relative_error, results_json, run_trial, write_csv, write_json)
from regshb.operators import NoiseModel
from regshb.solver import Mode, SolverConfig

SHB = SolverEntry("shb", Mode.SHB, SolverConfig(upsilon0=1e-6, upsilon1=1e-5))
SGD = SolverEntry("sgd", Mode.SGD, SolverConfig(beta_cap=0.0))


def _trial(k, iters, err, reason="stopping_rule", wall=0.1):
    return TrialResult(k, iters, iters if reason == "stopping_rule" else None, err, wall,
                       reason, True if reason == "stopping_rule" else None, 0.5)


def test_relative_error():
    assert relative_error([1.0, 1.0], [1.0, 1.0]) == 0.0
    assert relative_error([0.0, 0.0], [3.0, 4.0]) == 1.0
    assert relative_error([3.0, 0.0], [0.0, 2.0]) == pytest.approx(13 / 4)
    with pytest.raises(InputError):
        relative_error([0.0], [0.0])
    with pytest.raises(InputError):
        relative_error([0.0, 1.0], [1.0])


def test_trial_stats_excludes_safeguard_from_iterations():
    s = TrialStats.from_samples([_trial(1, 30, 0.2), _trial(0, 10, 0.1),
                                 _trial(2, 1000, 0.6, "safeguard")])
    assert s.mean_iter == 20.0
    assert s.mean_sq_rel_error == pytest.approx(0.3)
    assert s.safeguard_hits == 1
    assert [t.trial for t in s.samples] == [0, 1, 2]
    allbad = TrialStats.from_samples([_trial(0, 5, 0.1, "safeguard")])
    assert math.isnan(allbad.mean_iter)
    with pytest.raises(InputError):
        TrialStats.from_samples([])


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=40))
def test_trial_stats_order_invariant(errs):
    trials = [_trial(k, k + 1, e) for k, e in enumerate(errs)]
    a = TrialStats.from_samples(trials)
    b = TrialStats.from_samples(trials[::-1])
    assert a.mean_sq_rel_error == b.mean_sq_rel_error and a.mean_iter == b.mean_iter


def test_boxplot_example():
    b = boxplot_stats([1, 2, 3, 4, 100])
    assert (b.q25, b.median, b.q75) == (2.0, 3.0, 4.0)
    assert b.whisker_lo == 1.0 and b.whisker_hi == 4.0 and b.outliers == (100.0,)
    with pytest.raises(InputError):
        boxplot_stats([])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_boxplot_properties(xs):
    b = boxplot_stats(xs)
    assert b.q25 <= b.median <= b.q75
    assert b.whisker_lo <= b.whisker_hi
    iqr = b.q75 - b.q25
    for v in b.outliers:
        assert v < b.q25 - 1.5 * iqr or v > b.q75 + 1.5 * iqr
    assert len(b.outliers) + sum(b.whisker_lo <= x <= b.whisker_hi for x in xs) == len(xs)


def test_problem_validation():
    with pytest.raises(ConfigError):
        FredholmProblem(1).validate()
    with pytest.raises(ConfigError):
        TomoProblem(grid_n=0).validate()
    with pytest.raises(ConfigError):
        SchlierenProblem(grid_n=8).validate()
    assert build(FredholmProblem(20)) is build(FredholmProblem(20))


def test_make_data_streams():
    p = FredholmProblem(50)
    a, _ = make_data(p, NoiseModel.UNIFORM_SUP, 0.1, 3, 0, 0)
    b, _ = make_data(p, NoiseModel.UNIFORM_SUP, 0.1, 3, 0, 0)
    c, _ = make_data(p, NoiseModel.UNIFORM_SUP, 0.1, 3, 0, 1)
    d, _ = make_data(p, NoiseModel.UNIFORM_SUP, 0.1, 3, 1, 0)
    assert a.data.tobytes() == b.data.tobytes()
    assert not np.array_equal(a.data, c.data) and not np.array_equal(a.data, d.data)


def test_discrepancy_check():
    system, truth = make_data(FredholmProblem(50), NoiseModel.UNIFORM_SUP, 0.1, 3, 0, 0)
    ok, ratio = discrepancy_check(system, truth.x_dagger, 1.2)
    assert ok and ratio <= 1 / 1.2 + 1e-12
    ok, ratio = discrepancy_check(system, np.zeros(50), 1.2)
    assert not ok and ratio > 1


def test_run_trial_fixed_noise():
    p = FredholmProblem(60)
    a = run_trial(p, NoiseModel.UNIFORM_SUP, 0.1, 0, 3, SHB, 5, fixed_noise=True)
    b = run_trial(p, NoiseModel.UNIFORM_SUP, 0.1, 0, 3, SHB, 5)
    assert a.trial == b.trial == 3 and a.discrepancy_ok and b.discrepancy_ok


def _spec(**kw):
    base = dict(problem=FredholmProblem(60), noise_model=NoiseModel.UNIFORM_SUP,
                levels=(0.1, 0.05), solvers=(SGD, SHB), trials=3, base_seed=2)
    base.update(kw)
    return ExperimentSpec(**base)


@pytest.mark.parametrize("kw", [dict(trials=0), dict(levels=()), dict(levels=(-0.1,)),
                                dict(solvers=()), dict(solvers=(SHB, SHB)),
                                dict(solvers=(SolverEntry("x", Mode.SHB,
                                                          SolverConfig(batch=2)),)),
                                dict(solvers=(SolverEntry("x", Mode.SHB,
                                                          SolverConfig(mu0=5.0)),))])
def test_spec_validation(kw):
    with pytest.raises(ConfigError):
        _spec(**kw).validate()


def test_monte_carlo_layout_and_workers():
    spec = _spec()
    cells = monte_carlo(spec)
    assert [(c.solver, c.level) for c in cells] == [("sgd", 0.1), ("sgd", 0.05),
                                                    ("shb", 0.1), ("shb", 0.05)]
    assert all(len(c.stats.samples) == 3 for c in cells)
    assert all(s.discrepancy_ok for c in cells for s in c.stats.samples)
    par = monte_carlo(spec, workers=2)
    strip = lambda cs: [(c.solver, c.level, [(s.iterations, s.error) for s in c.stats.samples])
                        for c in cs]
    assert strip(cells) == strip(par)


def test_reports(tmp_path):
    spec = _spec(trials=2, levels=(0.1,))
    cells = monte_carlo(spec)
    write_csv(tmp_path / "r.csv", spec, cells)
    write_json(tmp_path / "r.json", spec, cells)
    header = (tmp_path / "r.csv").read_text().splitlines()[0]
    assert header.split(",") == list(CSV_COLUMNS)
    rows = read_csv(tmp_path / "r.csv")
    assert [r["solver"] for r in rows] == ["sgd", "shb"]
    assert rows[1]["iter"] == cells[1].stats.mean_iter
    assert rows[1]["error"] == cells[1].stats.mean_sq_rel_error
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc == json.loads(json.dumps(results_json(spec, cells)))
    assert "wall_time" not in doc["cells"][0]["samples"][0]
    assert len(doc["timing"]) == 2
