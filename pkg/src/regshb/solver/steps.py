"""Single iterations of the adaptive SHB method and its variants.

Each step returns a new :class:`IterState`; the dual/primal arrays are never
modified in place.  The active set is shared and updated in place.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..operators.system import ForwardSystem, duality_map
from ..penalty import Penalty
from .config import Mode, SolverConfig
from .rules import _beta, _gamma, _step, descent_weight
from .sampling import ActiveSet

__all__ = ["IterState", "StepOutcome", "initial_state", "shb_step", "sgd_step",
           "minibatch_step", "delta_min"]


@dataclass(frozen=True)
class IterState:
    """Iterate ``(xi_{n-1}, xi_n, x_n)`` with the scalars the next step needs.

    ``t_prev``, ``weight_prev`` and ``beta_prev`` belong to step ``n-1``;
    ``weight_prev`` is ``((1-eta)|r| - (1+eta) delta) |r|^(r-1)`` (summed over
    the batch for mini-batch steps).
    """

    xi_prev: np.ndarray
    xi: np.ndarray
    x_prev: np.ndarray
    x: np.ndarray
    gamma_tilde: float
    active: ActiveSet
    n: int = 0
    t_prev: float = 0.0
    weight_prev: float = 0.0
    beta_prev: float = 0.0


@dataclass(frozen=True)
class StepOutcome:
    """What happened in one step.

    For mini-batch steps `index` is a tuple and `residual_norm` is the
    ``r``-norm of all drawn residuals; `psi` sums ``|r_i|^r`` only over the
    blocks above their discrepancy level, which are the ones that move the
    iterate.
    """

    index: int | tuple
    residual_norm: float
    t: float
    beta: float
    removed: bool
    active_size: int
    delta_gate: float = 0.0
    psi: float = 0.0
    gamma_tilde: float = 0.0
    m_norm2: float = 0.0


def initial_state(system: ForwardSystem, penalty: Penalty, xi0) -> IterState:
    xi = np.broadcast_to(np.asarray(xi0, dtype=float), (system.size,)).copy()
    x = penalty.prox_conjugate(xi)
    return IterState(xi, xi, x, x, 0.0, ActiveSet(system.n_blocks))


def delta_min(noise_levels) -> float:
    """Smallest strictly positive noise level, or 0 if there is none."""
    pos = noise_levels[noise_levels > 0]
    return float(pos.min()) if pos.size else 0.0


def _norm(v: np.ndarray) -> float:
    return math.sqrt(float(np.dot(v, v)))


def _advance(state, system, penalty, cfg, momentum, exact, t, g, weight,
             delta_gate, sgd_removal, drawn):
    """Momentum, dual/primal update and active-set bookkeeping."""
    sigma = penalty.sigma
    m = state.xi - state.xi_prev
    mm = float(np.dot(m, m))
    if state.n == 0:
        gamma = 0.0
    else:
        gamma = _gamma(float(np.dot(m, state.x - state.x_prev)), state.t_prev,
                       state.weight_prev, state.beta_prev, state.gamma_tilde)
    beta = 0.0
    if momentum:
        gm = float(np.dot(g, m)) if t > 0 else 0.0
        beta = _beta(t, gm, mm, gamma, delta_gate, sigma, cfg, exact)

    xi_new = state.xi
    if t > 0:
        xi_new = xi_new - t * g
    if beta > 0:
        xi_new = xi_new + beta * m
    x_new = state.x if xi_new is state.xi else penalty.prox_conjugate(xi_new)

    active = state.active
    removed = t == 0 if sgd_removal else (t == 0 and beta == 0)
    if removed:
        for i in drawn:
            active.remove(i)
    else:
        active.reset()
    new = IterState(state.xi, xi_new, state.x, x_new, gamma, active, state.n + 1,
                    t, weight, beta)
    return new, beta, gamma, mm, removed


def shb_step(state: IterState, drawn: int, system: ForwardSystem, penalty: Penalty,
             cfg: SolverConfig, mode: Mode = Mode.SHB) -> tuple[IterState, StepOutcome]:
    """One single-index step (modes ``shb``, ``exact`` and ``sgd``)."""
    mode = Mode(mode)
    if not 0 <= drawn < system.n_blocks:
        raise IndexError(f"drawn index {drawn} out of range")
    exact = mode is Mode.EXACT
    delta = 0.0 if exact else float(system.noise_levels[drawn])
    eta, r = cfg.eta, cfg.r

    res_vec = system.residuals([drawn], state.x)[0]
    res = _norm(res_vec)
    psi = res ** r
    t, g, weight = 0.0, None, 0.0
    if (res > 0.0) if exact else (res > cfg.tau * delta):
        g = system.adjoint_sum([drawn], state.x, [duality_map(res_vec, r)])
        weight = descent_weight(res, delta, eta, r)
        t = _step(weight, float(np.dot(g, g)), psi, cfg)

    new, beta, gamma, mm, removed = _advance(
        state, system, penalty, cfg, mode.momentum, exact, t, g, weight, delta,
        mode is Mode.SGD, (drawn,))
    return new, StepOutcome(drawn, res, t, beta, removed, len(new.active),
                            delta, psi, gamma, mm)


def sgd_step(state, drawn, system, penalty, cfg):
    """Single-index step without momentum, removing the index when ``t = 0``."""
    return shb_step(state, drawn, system, penalty, cfg, Mode.SGD)


def minibatch_step(state: IterState, batch, system: ForwardSystem, penalty: Penalty,
                   cfg: SolverConfig, momentum: bool = True,
                   gate_delta: float | None = None) -> tuple[IterState, StepOutcome]:
    """One mini-batch step over the distinct indices in `batch`.

    `gate_delta` is the momentum gate level (default: :func:`delta_min` of
    the system's noise levels).
    """
    batch = list(batch)
    if len(batch) > system.n_blocks:
        raise ConfigError("batch size exceeds the number of equations")
    for i in batch:
        if not 0 <= i < system.n_blocks:
            raise IndexError(f"drawn index {i} out of range")
    eta, r = cfg.eta, cfg.r
    deltas = system.noise_levels
    if gate_delta is None:
        gate_delta = delta_min(deltas)

    res_vecs = system.residuals(batch, state.x)
    norms = [_norm(v) for v in res_vecs]
    psi_all = sum(nr ** r for nr in norms)
    hit = [k for k, i in enumerate(batch) if norms[k] > cfg.tau * float(deltas[i])]
    t, g, weight, psi = 0.0, None, 0.0, 0.0
    if hit:
        g = system.adjoint_sum([batch[k] for k in hit], state.x,
                               [duality_map(res_vecs[k], r) for k in hit])
        weight = sum(descent_weight(norms[k], float(deltas[batch[k]]), eta, r) for k in hit)
        psi = sum(norms[k] ** r for k in hit)
        t = _step(weight, float(np.dot(g, g)), psi, cfg)

    new, beta, gamma, mm, removed = _advance(
        state, system, penalty, cfg, momentum, gate_delta == 0.0, t, g, weight,
        gate_delta, False, batch)
    return new, StepOutcome(tuple(batch), psi_all ** (1.0 / r), t, beta, removed,
                            len(new.active), gate_delta, psi, gamma, mm)
