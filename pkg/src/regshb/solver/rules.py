"""Scalar rules of the adaptive iteration: step size, the computable bound
on ``<m_n, x_n - x_hat>`` and the gated momentum coefficient."""
from __future__ import annotations

import math

import numpy as np

from .config import SolverConfig

__all__ = ["step_size_noisy", "step_size_exact", "gamma_update", "momentum_coeff",
           "descent_weight"]


def descent_weight(res_norm: float, delta: float, eta: float, r: float) -> float:
    """``((1-eta) |r| - (1+eta) delta) |r|^(r-1)``: guaranteed decrease of
    ``<g, x_hat - x>`` per unit step."""
    return ((1.0 - eta) * res_norm - (1.0 + eta) * delta) * res_norm ** (r - 1.0)


def _step(weight: float, g_norm2: float, psi: float, cfg: SolverConfig) -> float:
    # psi = sum |r_i|^r; psi^(2/r - 1) is |r|^(2-r) for a single block
    cap = cfg.mu1 * psi ** (2.0 / cfg.r - 1.0)
    if g_norm2 == 0.0:
        return cap
    return min(cfg.mu0 * weight / g_norm2, cap)


def step_size_noisy(res_norm: float, g, delta: float, cfg: SolverConfig) -> float:
    """Step size for a drawn block with residual norm `res_norm`.

    Zero unless ``res_norm > tau * delta``; a vanishing gradient selects the
    ``mu1`` branch.
    """
    if not res_norm > cfg.tau * delta:
        return 0.0
    g = np.asarray(g, dtype=float)
    return _step(descent_weight(res_norm, delta, cfg.eta, cfg.r),
                 float(np.dot(g, g)), res_norm ** cfg.r, cfg)


def step_size_exact(res_norm: float, g, cfg: SolverConfig) -> float:
    if res_norm == 0.0:
        return 0.0
    g = np.asarray(g, dtype=float)
    return _step(descent_weight(res_norm, 0.0, cfg.eta, cfg.r),
                 float(np.dot(g, g)), res_norm ** cfg.r, cfg)


def _gamma(m_dot_dx: float, t_prev: float, weight_prev: float,
           beta_prev: float, gamma_prev: float) -> float:
    return m_dot_dx - t_prev * weight_prev + beta_prev * gamma_prev


def gamma_update(m, dx, t_prev: float, res_prev_norm: float, delta_prev: float,
                 beta_prev: float, gamma_prev: float, cfg: SolverConfig,
                 exact: bool = False) -> float:
    """Recursive upper bound ``gamma~_n`` of ``<m_n, x_n - x_hat>``.

    ``<m, dx> - (1-eta) t |r|^r + (1+eta) delta t |r|^(r-1) + beta gamma``
    with all scalars from the previous step; `exact` drops the delta term.
    """
    delta = 0.0 if exact else delta_prev
    w = descent_weight(res_prev_norm, delta, cfg.eta, cfg.r)
    return _gamma(float(np.dot(np.ravel(m), np.ravel(dx))), t_prev, w, beta_prev, gamma_prev)


def _beta(t: float, g_dot_m: float, m_norm2: float, gamma: float, delta_gate: float,
          sigma: float, cfg: SolverConfig, exact: bool = False) -> float:
    lhs = gamma - t / (2.0 * sigma) * g_dot_m
    if exact:
        ok = m_norm2 != 0.0 and lhs < 0.0
    else:
        ok = (math.sqrt(m_norm2) > cfg.upsilon0 * delta_gate
              and lhs < -cfg.upsilon1 * delta_gate * m_norm2)
    if not ok:
        return 0.0
    return min((t * g_dot_m - 2.0 * sigma * gamma) / m_norm2, cfg.beta_cap)


def momentum_coeff(t: float, g, m, gamma: float, delta_gate: float, sigma: float,
                   cfg: SolverConfig, exact: bool = False) -> float:
    """Momentum coefficient, or 0 when either stability gate fails.

    Gates: ``|m| > upsilon0 delta`` and
    ``gamma - t/(2 sigma) <g, m> < -upsilon1 delta |m|^2``
    (exact data: ``m != 0`` and ``gamma - t/(2 sigma) <g, m> < 0``).
    """
    m = np.ravel(np.asarray(m, dtype=float))
    g = np.ravel(np.asarray(g, dtype=float))
    return _beta(t, float(np.dot(g, m)), float(np.dot(m, m)), gamma,
                 delta_gate, sigma, cfg, exact)
