"""Discretised first-kind Fredholm integral equation on [0, 1]."""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .system import GroundTruth, MatrixSystem

__all__ = ["kernel", "exact_solution", "fredholm_build"]


def kernel(s, t):
    """``4 exp(-(s - t)^2 / 0.01)``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return 4.0 * np.exp(-((s - t) ** 2) / 0.01)


def exact_solution(t):
    """``max(40 t (t - 0.25) (0.8 - t), 0)``."""
    t = np.asarray(t, dtype=float)
    return np.maximum(40.0 * t * (t - 0.25) * (0.8 - t), 0.0)


def fredholm_build(n: int = 300) -> tuple[MatrixSystem, GroundTruth]:
    """N scalar equations ``sum_j w_j k(s_i, t_j) x_j = y_i``.

    Sample points and quadrature nodes coincide: ``s_i = t_i = i / (N - 1)``;
    ``w`` are trapezoid weights.  The system has ``eta = 0``.
    """
    if n < 2:
        raise ConfigError("Fredholm problem needs N >= 2")
    t = np.linspace(0.0, 1.0, n)
    w = np.full(n, 1.0 / (n - 1))
    w[0] = w[-1] = 0.5 / (n - 1)
    A = kernel(t[:, None], t[None, :]) * w[None, :]
    system = MatrixSystem(A)
    truth = GroundTruth.from_system(system, exact_solution(t))
    return system, truth
