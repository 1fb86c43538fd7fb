import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regshb.cli.checks import descent_monitor
from regshb.errors import ConfigError
from regshb.harness import FredholmProblem, make_data
from regshb.operators import MatrixSystem, NoiseModel
from regshb.penalty import ConstrainedQuadratic
from regshb.solver import (ActiveSet, IndexSampler, Mode, Sampling, SolverConfig, gamma_update,
                           initial_state, minibatch_step, momentum_coeff, read_trace_binary, run,
                           sgd_step, shb_step, solver_stream, step_size_exact, step_size_noisy)

CFG = SolverConfig(mu0=0.7, mu1=1e4, tau=1.2, upsilon0=1e-5, upsilon1=1e-4, beta_cap=0.99)
PEN = ConstrainedQuadratic()


@pytest.fixture(scope="module")
def fredholm_data():
    return make_data(FredholmProblem(), NoiseModel.UNIFORM_SUP, 0.1, 21, 0, 0)


# step size, gamma and momentum examples

def test_step_size_inside_discrepancy_is_zero():
    assert step_size_noisy(1.0, [1.0], 1.0, CFG) == 0.0
    assert step_size_noisy(1.2, [1.0], 1.0, CFG) == 0.0


def test_step_size_mu0_branch():
    assert step_size_noisy(2.0, [2.0], 0.5, CFG) == pytest.approx(0.525, abs=1e-15)


def test_step_size_mu1_branch():
    assert step_size_noisy(2.0, [1e-8], 0.5, CFG) == 1e4
    assert step_size_noisy(2.0, [0.0], 0.5, CFG) == 1e4


def test_step_size_exact():
    assert step_size_exact(0.0, [1.0], CFG) == 0.0
    assert step_size_exact(1.0, [1.0], CFG) == pytest.approx(0.7, abs=1e-15)


def test_step_size_general_r():
    cfg = CFG.replace(r=3.0)
    # weight (2 - 0.5) * 4 = 6, |g|^2 = 9
    assert step_size_noisy(2.0, [3.0], 0.5, cfg) == pytest.approx(0.7 * 6 / 9)
    assert step_size_noisy(2.0, [1e-9], 0.5, cfg) == pytest.approx(1e4 * 8 ** (-1 / 3))


@given(st.floats(0.01, 100), st.floats(0, 10), st.floats(1e-6, 100))
def test_step_size_bounded_by_both_branches(res, delta, g):
    t = step_size_noisy(res, [g], delta, CFG)
    assert t >= 0
    if t > 0:
        assert res > CFG.tau * delta
        assert t <= CFG.mu0 * (res - delta) * res / g ** 2 * (1 + 1e-12)
        assert t <= CFG.mu1 * (1 + 1e-12)


def test_gamma_examples():
    assert gamma_update([0.42], [0.42], 0.42, 1.0, 0.0, 0.0, 0.0, CFG) == pytest.approx(-0.2436)
    assert gamma_update([0.0], [0.0], 1.0, 2.0, 0.5, 0.0, 0.0, CFG) == pytest.approx(-3.0)
    # exact mode ignores delta
    assert gamma_update([0.0], [0.0], 1.0, 2.0, 0.5, 0.0, 0.0, CFG, exact=True) == pytest.approx(-4.0)


def test_momentum_examples():
    assert momentum_coeff(1.0, [1.0], [0.0], -1.0, 1e-3, 0.5, CFG) == 0.0
    assert momentum_coeff(0.2, [1.0], [1.0], -0.2, 1e-3, 0.5, CFG) == pytest.approx(0.4)
    assert momentum_coeff(0.2, [1.0], [1.0], -2.0, 1e-3, 0.5, CFG) == 0.99


def test_momentum_gates():
    # second gate: gamma - t/(2 sigma) <g,m> must be below -upsilon1 delta |m|^2
    assert momentum_coeff(0.0, [1.0], [1.0], 0.5, 1e-3, 0.5, CFG) == 0.0
    assert momentum_coeff(0.0, [1.0], [1.0], -1e-8, 1e-3, 0.5, CFG) == 0.0
    # first gate: |m| must exceed upsilon0 delta
    assert momentum_coeff(0.0, [1.0], [1e-9], -1.0, 1e-3, 0.5, CFG) == 0.0
    assert momentum_coeff(0.0, [1.0], [1e-9], -1.0, 0.0, 0.5, CFG, exact=True) == 0.99


@given(st.floats(0, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10),
       st.floats(1e-6, 1))
def test_momentum_in_range(t, g, m, gamma, delta):
    beta = momentum_coeff(t, [g], [m], gamma, delta, 0.5, CFG)
    assert 0.0 <= beta <= CFG.beta_cap


# config

@pytest.mark.parametrize("kw,key", [
    (dict(mu0=2.0), "mu0"), (dict(mu0=0.0), "mu0"), (dict(mu1=0.0), "mu1"),
    (dict(tau=1.0), "tau"), (dict(eta=0.5, tau=2.9), "tau"), (dict(eta=1.0), "eta"),
    (dict(upsilon0=0.0), "upsilon0"), (dict(upsilon1=-1.0), "upsilon1"),
    (dict(beta_cap=1.0), "beta_cap"), (dict(r=1.0), "r"), (dict(batch=0), "batch"),
    (dict(max_iters=0), "max_iters"), (dict(mu1=math.nan), "mu1"),
])
def test_config_rejects(kw, key):
    with pytest.raises(ConfigError, match=f"^{key}:"):
        CFG.replace(**kw).validate(0.5)


def test_config_batch_vs_blocks():
    with pytest.raises(ConfigError, match="^batch:"):
        CFG.replace(batch=5).validate(0.5, 4)
    CFG.replace(batch=4).validate(0.5, 4)


def test_iteration_caps():
    assert CFG.iteration_cap(Mode.SHB) == 10 ** 7
    assert CFG.iteration_cap(Mode.MINIBATCH) == 10 ** 6
    assert CFG.replace(max_iters=5).iteration_cap(Mode.SGD) == 5
    assert Mode("minibatch_sgd").batched and not Mode("minibatch_sgd").momentum


# sampling

def test_sampler_uniform():
    s = IndexSampler(0)
    counts = Counter(s.below(7) for _ in range(70000))
    assert set(counts) == set(range(7))
    assert max(abs(c - 10000) for c in counts.values()) < 500


def test_sampler_reproducible():
    a = [IndexSampler(solver_stream(5, 1, 2)).below(1000) for _ in range(3)]
    assert a[0] == a[1] == a[2]
    s1, s2 = IndexSampler(9), IndexSampler(9)
    assert [s1.below(10) for _ in range(50)] == [s2.below(10) for _ in range(50)]


def test_subset_distinct_and_single_draw():
    s1, s2 = IndexSampler(3), IndexSampler(3)
    pool = list(range(20, 40))
    for _ in range(50):
        sub = s1.subset(pool, 8)
        assert len(set(sub)) == 8 and set(sub) <= set(pool)
        s2.subset(pool, 8)
    a, b = IndexSampler(4), IndexSampler(4)
    assert [a.subset(pool, 1)[0] for _ in range(30)] == [pool[b.below(20)] for _ in range(30)]
    assert sorted(IndexSampler(1).subset(pool, 50)) == pool


@settings(max_examples=50)
@given(st.integers(1, 30), st.lists(st.integers(0, 29), max_size=60))
def test_active_set_operations(n, ops):
    act = ActiveSet(n)
    ref = set(range(n))
    for i in ops:
        if i < n:
            act.remove(i)
            ref.discard(i)
        assert len(act) == len(ref) and set(act.members()) == ref
        assert all((j in act) == (j in ref) for j in range(n))
    act.reset()
    assert len(act) == n and set(act.members()) == set(range(n))


def test_active_set_draws_only_members():
    act = ActiveSet(10)
    for i in (0, 3, 4, 9):
        act.remove(i)
    s = IndexSampler(2)
    assert all(act.draw(s) in act for _ in range(200))
    batch = act.draw_batch(s, 4)
    assert len(set(batch)) == 4 and all(i in act for i in batch)


# single steps

def test_shb_step_out_of_range(fredholm_data):
    system, _ = fredholm_data
    state = initial_state(system, PEN, 0.0)
    with pytest.raises(IndexError):
        shb_step(state, system.n_blocks, system, PEN, CFG)
    with pytest.raises(IndexError):
        minibatch_step(state, [-1], system, PEN, CFG)


def test_minibatch_too_large():
    system = MatrixSystem(np.eye(3)).with_data(np.ones(3), np.zeros(3))
    with pytest.raises(ConfigError):
        minibatch_step(initial_state(system, PEN, 0.0), [0, 1, 2, 0], system, PEN, CFG)


def test_first_step_has_no_momentum(fredholm_data):
    system, _ = fredholm_data
    state = initial_state(system, PEN, 0.0)
    new, out = shb_step(state, int(np.argmax(system.data)), system, PEN, CFG)
    assert out.beta == 0.0 and out.t > 0 and out.gamma_tilde == 0.0
    np.testing.assert_array_equal(state.xi, 0.0)  # inputs untouched
    assert new.n == 1 and len(new.active) == system.n_blocks


def test_step_inside_discrepancy_removes_index():
    system = MatrixSystem(np.eye(3)).with_data(np.array([0.0, 1.0, 0.0]), np.full(3, 0.1))
    state = initial_state(system, PEN, 0.0)
    new, out = shb_step(state, 0, system, PEN, CFG)
    assert out.t == 0 and out.beta == 0 and out.removed and 0 not in new.active
    assert new.xi is state.xi
    new, out = shb_step(new, 1, system, PEN, CFG)
    assert out.t > 0 and not out.removed and len(new.active) == 3


def test_sgd_removes_when_no_step():
    system = MatrixSystem(np.eye(2)).with_data(np.zeros(2), np.full(2, 0.1))
    state = initial_state(system, PEN, 0.0)
    _, out = sgd_step(state, 1, system, PEN, CFG.replace(beta_cap=0.0))
    assert out.removed and out.active_size == 1


def test_exact_step_uses_zero_delta():
    system = MatrixSystem(np.eye(2)).with_data(np.array([0.05, 0.0]), np.full(2, 0.1))
    state = initial_state(system, PEN, 0.0)
    _, out = shb_step(state, 0, system, PEN, CFG, Mode.EXACT)
    assert out.t > 0
    _, out = shb_step(state, 0, system, PEN, CFG, Mode.SHB)
    assert out.t == 0


# runs

def test_run_terminates_within_discrepancy(fredholm_data):
    system, truth = fredholm_data
    rec = run(system, PEN, CFG, Mode.SHB, rng=solver_stream(1))
    assert rec.stop_reason == "stopping_rule" and rec.n_delta == rec.iterations
    assert not rec.safeguard_hit
    res = np.abs(system.matrix @ rec.final_x - system.data)
    assert np.all(res <= CFG.tau * system.noise_levels * (1 + 1e-9))
    assert rec.active_size[-1] == 0 and rec.removed[-1]
    assert np.all(rec.final_x >= 0)


def test_run_safeguard(fredholm_data):
    system, _ = fredholm_data
    rec = run(system, PEN, CFG.replace(max_iters=10), Mode.SHB, rng=solver_stream(1))
    assert rec.stop_reason == "safeguard" and rec.safeguard_hit and rec.iterations == 10
    assert rec.n_delta is None


def test_run_exact_horizon():
    system, truth = make_data(FredholmProblem(50), NoiseModel.UNIFORM_SUP, 0.0, 0, 0, 0)
    rec = run(system, PEN, CFG.replace(max_iters=500), Mode.EXACT, rng=solver_stream(2))
    assert rec.stop_reason == "horizon" and rec.iterations == 500


def test_run_single_index_rejects_batch(fredholm_data):
    system, _ = fredholm_data
    with pytest.raises(ConfigError):
        run(system, PEN, CFG.replace(batch=2), Mode.SHB)


def test_run_deterministic(fredholm_data):
    system, _ = fredholm_data
    a = run(system, PEN, CFG, Mode.SHB, rng=solver_stream(8))
    b = run(system, PEN, CFG, Mode.SHB, rng=solver_stream(8))
    assert a.index == b.index and a.beta == b.beta
    assert a.final_x.tobytes() == b.final_x.tobytes()


def test_sgd_equals_shb_without_momentum(fredholm_data):
    system, _ = fredholm_data
    cfg = CFG.replace(beta_cap=0.0)
    a = run(system, PEN, cfg, Mode.SHB, rng=solver_stream(3))
    b = run(system, PEN, cfg, Mode.SGD, rng=solver_stream(3))
    assert a.index == b.index and a.t == b.t and a.final_xi.tobytes() == b.final_xi.tobytes()


def test_minibatch_b1_equals_shb(fredholm_data):
    system, _ = fredholm_data
    a = run(system, PEN, CFG, Mode.SHB, rng=solver_stream(6))
    b = run(system, PEN, CFG, Mode.MINIBATCH, rng=solver_stream(6))
    assert [(i,) for i in a.index] == b.index
    assert a.t == b.t and a.beta == b.beta
    assert a.final_xi.tobytes() == b.final_xi.tobytes()


def test_minibatch_full_batch_is_deterministic_landweber():
    system, _ = make_data(FredholmProblem(40), NoiseModel.UNIFORM_SUP, 0.05, 4, 0, 0)
    cfg = CFG.replace(batch=40, max_iters=50)
    a = run(system, PEN, cfg, Mode.MINIBATCH_SGD, rng=solver_stream(1))
    b = run(system, PEN, cfg, Mode.MINIBATCH_SGD, rng=solver_stream(99))
    # same iteration up to the summation order of the batch
    np.testing.assert_allclose(a.final_xi, b.final_xi, rtol=1e-10, atol=1e-14)


def test_full_sampling_runs(fredholm_data):
    system, _ = fredholm_data
    rec = run(system, PEN, CFG.replace(sampling=Sampling.FULL, max_iters=200), Mode.SHB,
              rng=solver_stream(0))
    assert rec.iterations <= 200


@pytest.mark.parametrize("mode", [Mode.SHB, Mode.SGD, Mode.EXACT, Mode.MINIBATCH])
def test_descent_and_gamma_bound(mode):
    level = 0.0 if mode is Mode.EXACT else 0.05
    system, truth = make_data(FredholmProblem(80), NoiseModel.UNIFORM_SUP, level, 5, 0, 1)
    cfg = SolverConfig(upsilon0=1e-6, upsilon1=1e-5,
                       beta_cap=0.0 if mode is Mode.SGD else 0.99,
                       batch=4 if mode is Mode.MINIBATCH else 1,
                       max_iters=2000 if mode is Mode.EXACT else 20000)
    mon = descent_monitor(PEN, truth.x_dagger, cfg)
    run(system, PEN, cfg, mode, rng=solver_stream(5), monitor=mon, trace=False)
    assert mon.steps > 0 and mon.violations == []


def test_momentum_is_used(fredholm_data):
    system, _ = fredholm_data
    rec = run(system, PEN, SolverConfig(upsilon0=1e-6, upsilon1=1e-5), Mode.SHB,
              rng=solver_stream(0))
    assert sum(b > 0 for b in rec.beta) > 0


def test_trace_formats(tmp_path, fredholm_data):
    import json
    system, _ = fredholm_data
    rec = run(system, PEN, CFG.replace(max_iters=50), Mode.SHB, rng=solver_stream(0))
    rec.write_jsonl(tmp_path / "t.jsonl")
    rec.write_binary(tmp_path / "t.bin")
    lines = (tmp_path / "t.jsonl").read_text().splitlines()
    assert len(lines) == 51
    assert json.loads(lines[-1])["stop_reason"] == "safeguard"
    first = json.loads(lines[0])
    assert first["index"] == rec.index[0] and first["t"] == rec.t[0]
    arr = read_trace_binary(tmp_path / "t.bin")
    assert arr.shape == (50,)
    np.testing.assert_array_equal(arr["index"], rec.index)
    np.testing.assert_array_equal(arr["beta"], rec.beta)
    assert (tmp_path / "t.bin").stat().st_size == 50 * arr.dtype.itemsize


def test_minibatch_psi_counts_only_moving_rows():
    system = MatrixSystem(np.eye(3)).with_data(np.array([2.0, 0.05, 3.0]), np.full(3, 0.1))
    _, out = minibatch_step(initial_state(system, PEN, 0.0), [0, 1, 2], system, PEN, CFG)
    assert out.psi == pytest.approx(4.0 + 9.0)
    assert out.residual_norm == pytest.approx(math.sqrt(4.0 + 0.0025 + 9.0))
