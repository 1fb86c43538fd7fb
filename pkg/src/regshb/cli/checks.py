"""Self-test suite behind ``regshb check``.

Each check returns ``(passed, detail)``.  Oracles are independent of the
code under test: scalar formulas evaluated by hand, inner-product identities,
finite differences and exhaustive search.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable

import numpy as np

from ..harness import discrepancy_check, make_data
from ..harness.problems import FredholmProblem
from ..operators import (NoiseModel, SchlierenSystem, duality_map, fredholm_build, h1_inner,
                         helmholtz_solve, ray_matrix)
from ..operators.schlieren import dirichlet_eigenvalues
from ..operators.system import MatrixSystem
from ..penalty import (ConstrainedQuadratic, PdhgSettings, TVQuadratic, bregman_distance,
                       total_variation)
from ..solver import (Mode, SolverConfig, gamma_update, minibatch_step, momentum_coeff, run,
                      shb_step, solver_stream, step_size_exact, step_size_noisy)
from ..solver.steps import initial_state

__all__ = ["CHECKS", "run_checks", "tv1d_exact", "descent_monitor"]


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def tv1d_exact(f, lam: float) -> np.ndarray:
    """Exact minimiser of ``1/(2 lam) |z - f|^2 + sum |z_{k+1} - z_k|`` for a
    short 1D signal, by enumerating segmentations and jump signs.

    On a segment S with outgoing jump signs ``s_left`` (into S) and
    ``s_right`` the optimality condition gives the constant
    ``mean(f_S) - lam (s_right - s_left) / |S|``; every candidate is scored
    with the true objective and the best one returned.
    """
    f = np.asarray(f, dtype=float)
    n = f.size
    best, best_val = None, math.inf
    for cuts in itertools.product((0, 1), repeat=n - 1):
        bounds = [0] + [k + 1 for k, c in enumerate(cuts) if c] + [n]
        segs = list(zip(bounds[:-1], bounds[1:]))
        for signs in itertools.product((-1.0, 1.0), repeat=len(segs) - 1):
            z = np.empty(n)
            for k, (a, b) in enumerate(segs):
                s_in = signs[k - 1] if k > 0 else 0.0     # sign of z_S - z_prev
                s_out = signs[k] if k < len(signs) else 0.0  # sign of z_next - z_S
                z[a:b] = f[a:b].mean() - lam * (s_in - s_out) / (b - a)
            val = np.sum((z - f) ** 2) / (2 * lam) + np.sum(np.abs(np.diff(z)))
            if val < best_val:
                best, best_val = z, val
    return best


def descent_monitor(penalty, x_hat, cfg: SolverConfig, slack: float = 1e-10):
    """Monitor asserting the per-step Bregman descent bound and the
    domination of ``<m_n, x_n - x_hat>`` by the recursive bound; collects
    violations in ``.violations``."""
    c0 = (1 - cfg.mu0 / (4 * penalty.sigma)) * (1 - cfg.eta - (1 + cfg.eta) / cfg.tau)

    def mon(prev, out, new):
        d0 = bregman_distance(penalty, x_hat, prev.x, prev.xi)
        d1 = bregman_distance(penalty, x_hat, new.x, new.xi)
        bound = (-c0 * out.t * out.psi
                 - 0.5 * cfg.upsilon1 * out.delta_gate * out.beta * out.m_norm2
                 + slack * (1 + abs(d0)))
        if d1 - d0 > bound:
            mon.violations.append(("descent", prev.n, d1 - d0, bound))
        m = prev.xi - prev.xi_prev
        true_gamma = float(np.dot(m, prev.x - x_hat))
        if out.gamma_tilde < true_gamma - 1e-9 * (1 + abs(true_gamma)):
            mon.violations.append(("gamma", prev.n, out.gamma_tilde, true_gamma))
        mon.steps += 1

    mon.violations = []
    mon.steps = 0
    return mon


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def _close(a, b, tol):
    return abs(a - b) <= tol


def check_step_rules():
    cfg = SolverConfig(mu0=0.7, mu1=1e4, tau=1.2, upsilon0=1e-5, upsilon1=1e-4, beta_cap=0.99)
    ok = [
        step_size_noisy(1.0, [1.0], 1.0, cfg) == 0.0,
        _close(step_size_noisy(2.0, [2.0], 0.5, cfg), 0.525, 1e-15),
        step_size_noisy(2.0, [1e-8], 0.5, cfg) == 1e4,
        step_size_exact(0.0, [1.0], cfg) == 0.0,
        _close(step_size_exact(1.0, [1.0], cfg), 0.7, 1e-15),
        _close(gamma_update([0.42], [0.42], 0.42, 1.0, 0.0, 0.0, 0.0, cfg), -0.2436, 1e-12),
        _close(gamma_update([0.0], [0.0], 1.0, 2.0, 0.5, 0.0, 0.0, cfg), -3.0, 1e-12),
        momentum_coeff(1.0, [1.0], [0.0], -1.0, 1e-3, 0.5, cfg) == 0.0,
        _close(momentum_coeff(0.2, [1.0], [1.0], -0.2, 1e-3, 0.5, cfg), 0.4, 1e-12),
        momentum_coeff(0.2, [1.0], [1.0], -2.0, 1e-3, 0.5, cfg) == 0.99,
    ]
    return all(ok), f"{sum(ok)}/{len(ok)} scalar examples"


def check_duality_map():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        y = rng.standard_normal(rng.integers(1, 8))
        r = float(rng.uniform(1.1, 4.0))
        j = duality_map(y, r)
        ny = np.linalg.norm(y)
        worst = max(worst, abs(j @ y - ny ** r) / ny ** r,
                    abs(np.linalg.norm(j) - ny ** (r - 1)) / ny ** (r - 1))
    return worst <= 1e-12, f"max relative defect {worst:.1e}"


def check_linear_adjoints():
    rng = np.random.default_rng(2)
    fred, _ = fredholm_build(50)
    ct = MatrixSystem(ray_matrix(np.linspace(0, np.pi, 7, endpoint=False),
                                 np.linspace(-11, 11, 23), 16, 16.0))
    worst = 0.0
    for system in (fred, ct):
        for _ in range(100):
            i = int(rng.integers(system.n_blocks))
            h = rng.standard_normal(system.size)
            w = rng.standard_normal(1)
            lhs = float(system.linearize(i, None, h) @ w)
            rhs = float(h @ system.adjoint(i, None, w))
            worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-10, f"max |<Lh,w> - <h,L*w>| = {worst:.1e}"


def check_schlieren():
    rng = np.random.default_rng(3)
    s = SchlierenSystem(16, 6)
    shape = (16, 16)
    adj, fd = 0.0, 0.0
    for _ in range(100):
        i = int(rng.integers(s.n_blocks))
        f, h = rng.random(s.size), rng.standard_normal(s.size)
        g = rng.standard_normal(16)
        lhs = float(s.linearize(i, f, h) @ g)
        rhs = h1_inner(h, s.adjoint(i, f, g), shape)
        adj = max(adj, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    for _ in range(20):
        i = int(rng.integers(s.n_blocks))
        f, h = rng.random(s.size), rng.standard_normal(s.size)
        eps = 1e-4
        num = (s.apply(i, f + eps * h) - s.apply(i, f - eps * h)) / (2 * eps)
        ana = s.linearize(i, f, h)
        fd = max(fd, np.linalg.norm(num - ana) / np.linalg.norm(ana))
    return adj <= 1e-8 and fd <= 1e-4, f"adjoint {adj:.1e}, finite differences {fd:.1e}"


def check_helmholtz():
    n = 12
    k, l = 3, 5
    jj = np.arange(1, n + 1)
    mode = np.outer(np.sin(jj * k * np.pi / (n + 1)), np.sin(jj * l * np.pi / (n + 1)))
    lam = dirichlet_eigenvalues(n)
    err = np.abs(helmholtz_solve(mode) - mode / (1 + lam[k - 1] + lam[l - 1])).max()
    rng = np.random.default_rng(4)
    a, b = rng.standard_normal((n, n)), rng.standard_normal((n, n))
    sym = abs(np.sum(helmholtz_solve(a) * b) - np.sum(a * helmholtz_solve(b)))
    return err <= 1e-12 and sym <= 1e-10, f"mode error {err:.1e}, symmetry {sym:.1e}"


def check_prox():
    rng = np.random.default_rng(5)
    xi = rng.standard_normal(1000)
    exact = np.array_equal(ConstrainedQuadratic().prox_conjugate(xi), np.maximum(xi, 0.0))
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 9))
        lam = float(rng.uniform(0.2, 2.0))
        xi = rng.standard_normal(n) * 2
        # tight tolerance: the default relative gap 1e-3 only bounds the
        # objective error by 1e-3 * max(1, |objective|)
        pen = TVQuadratic(lam, (n,), PdhgSettings(gap_tol=1e-6, max_iters=20000))
        z = pen.prox_conjugate(xi)
        zs = tv1d_exact(lam * xi, lam)
        obj = lambda v: pen.value(v) - float(xi @ v)
        worst = max(worst, obj(z) - obj(zs))
    return exact and worst <= 1e-3, f"max-prox exact={exact}, TV objective gap {worst:.1e}"


def check_descent():
    problem = FredholmProblem(60)
    pen = ConstrainedQuadratic()
    total, bad = 0, 0
    for trial, mode in itertools.product(range(3), (Mode.SHB, Mode.SGD, Mode.EXACT)):
        level = 0.0 if mode is Mode.EXACT else 0.05
        system, truth = make_data(problem, NoiseModel.UNIFORM_SUP, level, 7, 0, trial)
        cfg = SolverConfig(upsilon0=1e-6, upsilon1=1e-5,
                           beta_cap=0.0 if mode is Mode.SGD else 0.99,
                           max_iters=3000 if mode is Mode.EXACT else None)
        mon = descent_monitor(pen, truth.x_dagger, cfg)
        run(system, pen, cfg, mode, rng=solver_stream(7, 1, trial), monitor=mon, trace=False)
        total += mon.steps
        bad += len(mon.violations)
    return bad == 0, f"{total} steps, {bad} violations"


def check_equivalences():
    system, _ = make_data(FredholmProblem(), NoiseModel.UNIFORM_SUP, 0.05, 11, 0, 0)
    pen = ConstrainedQuadratic()
    cfg = SolverConfig(upsilon0=1e-6, upsilon1=1e-5)
    a = run(system, pen, cfg.replace(beta_cap=0.0), Mode.SHB, rng=solver_stream(3))
    b = run(system, pen, cfg.replace(beta_cap=0.0), Mode.SGD, rng=solver_stream(3))
    same_sgd = a.index == b.index and a.t == b.t and np.array_equal(a.final_xi, b.final_xi)
    sa = initial_state(system, pen, 0.0)
    sb = initial_state(system, pen, 0.0)
    idx = solver_stream(4).integers(0, system.n_blocks, 200)
    same_mb = True
    for i in idx:
        sa, oa = shb_step(sa, int(i), system, pen, cfg)
        sb, ob = minibatch_step(sb, [int(i)], system, pen, cfg)
        same_mb &= oa.t == ob.t and oa.beta == ob.beta and np.array_equal(sa.xi, sb.xi)
    return same_sgd and same_mb, f"sgd={same_sgd}, minibatch b=1={same_mb}"


def check_stopping():
    problem = FredholmProblem()
    bad = 0
    for trial in range(5):
        system, _ = make_data(problem, NoiseModel.UNIFORM_SUP, 0.1, 13, 0, trial)
        cfg = SolverConfig(upsilon0=1e-6, upsilon1=1e-5)
        rec = run(system, ConstrainedQuadratic(), cfg, Mode.SHB,
                  rng=solver_stream(13, 0, trial, 1), trace=False)
        ok, _ = discrepancy_check(system, rec.final_x, cfg.tau)
        bad += not (ok and rec.stop_reason == "stopping_rule")
    return bad == 0, f"{5 - bad}/5 runs stop with all residuals within tau*delta"


def check_tv_value():
    u = np.array([[1.0, 0.0], [0.0, 0.0]])
    return _close(total_variation(u), math.sqrt(2.0), 1e-15), "isotropic TV of a corner"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "step_rules": check_step_rules,
    "duality_map": check_duality_map,
    "linear_adjoints": check_linear_adjoints,
    "schlieren_derivative": check_schlieren,
    "helmholtz": check_helmholtz,
    "total_variation": check_tv_value,
    "prox_oracles": check_prox,
    "descent": check_descent,
    "mode_equivalence": check_equivalences,
    "stopping_rule": check_stopping,
}


def run_checks(names=None) -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in CHECKS.items():
        if names and name not in names:
            continue
        try:
            ok, detail = fn()
        except Exception as e:  # a crashing check is a failed check
            ok, detail = False, f"{type(e).__name__}: {e}"
        out.append((name, bool(ok), detail))
    return out
