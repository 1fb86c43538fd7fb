"""Strongly convex penalties and their conjugate-prox maps.

Two penalties are provided:

* :class:`ConstrainedQuadratic` -- ``1/2 |x|^2`` restricted to the nonnegative
  orthant (modulus ``sigma = 1/2``).  Its conjugate-prox is ``max(xi, 0)``.
* :class:`TVQuadratic` -- ``1/(2 lam) |x|^2 + TV(x)`` on a 1D or 2D grid
  (modulus ``sigma = 1/(2 lam)``).  Its conjugate-prox is a total variation
  denoising problem, solved here by a primal-dual hybrid gradient loop.

The discrete total variation is isotropic and built from forward differences
with a replicate boundary (the last difference along each axis is zero).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConfigError, InputError

__all__ = [
    "ConstrainedQuadratic",
    "TVQuadratic",
    "PdhgSettings",
    "PdhgResult",
    "Penalty",
    "prox_conjugate",
    "penalty_value",
    "bregman_distance",
    "pdhg_tv_denoise",
    "grad",
    "div",
    "total_variation",
    "gradient_norm_bound",
]


def _check_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite components")


# --------------------------------------------------------------------------
# discrete gradient / divergence
# --------------------------------------------------------------------------

def grad(u: np.ndarray) -> np.ndarray:
    """Forward-difference gradient with replicate boundary.

    Returns an array of shape ``(u.ndim,) + u.shape``.
    """
    g = np.zeros((u.ndim,) + u.shape)
    if u.ndim == 1:
        g[0, :-1] = u[1:] - u[:-1]
    elif u.ndim == 2:
        g[0, :, :-1] = u[:, 1:] - u[:, :-1]
        g[1, :-1, :] = u[1:, :] - u[:-1, :]
    else:
        raise InputError("only 1D and 2D grids are supported")
    return g


def div(p: np.ndarray) -> np.ndarray:
    """Discrete divergence, the negative adjoint of :func:`grad`."""
    ndim = p.shape[0]
    if ndim == 1:
        q = p[0]
        d = np.zeros_like(q)
        d[:-1] += q[:-1]
        d[1:] -= q[:-1]
        return d
    px, py = p[0], p[1]
    d = np.zeros_like(px)
    d[:, :-1] += px[:, :-1]
    d[:, 1:] -= px[:, :-1]
    d[:-1, :] += py[:-1, :]
    d[1:, :] -= py[:-1, :]
    return d


def gradient_norm_bound(ndim: int) -> float:
    """Upper bound on the operator norm of :func:`grad` (2 in 1D, sqrt(8) in 2D)."""
    return math.sqrt(4.0 * ndim)


def total_variation(u: np.ndarray) -> float:
    """Isotropic discrete total variation of a 1D or 2D array."""
    g = grad(u)
    return float(np.sum(np.sqrt(np.sum(g * g, axis=0))))


# --------------------------------------------------------------------------
# PDHG for TV denoising
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PdhgSettings:
    """Stopping and step parameters of the TV denoiser.

    ``primal_step`` and ``dual_step`` default to ``1/|grad|`` for the grid
    dimension in use.  With ``accelerate`` the steps are rebalanced each
    iteration using the strong convexity of the data term.
    """

    gap_tol: float = 1e-3
    max_iters: int = 100
    primal_step: float | None = None
    dual_step: float | None = None
    accelerate: bool = True

    def __post_init__(self):
        if not self.gap_tol > 0:
            raise ConfigError("gap_tol must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        for name in ("primal_step", "dual_step"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")

    def steps(self, ndim: int) -> tuple[float, float]:
        L = gradient_norm_bound(ndim)
        tau = self.primal_step if self.primal_step is not None else 1.0 / L
        sig = self.dual_step if self.dual_step is not None else 1.0 / L
        if tau * sig * L * L > 1.0 + 1e-12:
            raise ConfigError(
                "primal_step * dual_step * |grad|^2 must not exceed 1")
        return tau, sig


@dataclass
class PdhgResult:
    z: np.ndarray
    iterations: int
    gap: float
    converged: bool

    @property
    def reason(self) -> str:
        return "gap" if self.converged else "max_iters"


def _tv_primal(z, f, lam):
    return float(np.sum((z - f) ** 2) / (2.0 * lam) + total_variation(z))


def _tv_dual(p, f, lam):
    kt = -div(p)
    return float(np.sum(kt * f) - 0.5 * lam * np.sum(kt * kt))


def _project_unit_ball(p: np.ndarray) -> np.ndarray:
    nrm = np.sqrt(np.sum(p * p, axis=0))
    return p / np.maximum(nrm, 1.0)


def pdhg_tv_denoise(target, lam: float, settings: PdhgSettings | None = None,
                    shape: tuple[int, ...] | None = None) -> PdhgResult:
    """Approximately minimise ``1/(2 lam) |z - target|^2 + TV(z)``.

    Parameters
    ----------
    target : array
        Data on a 1D or 2D grid.  A flat array is reshaped to `shape`.
    lam : float
        Weight of the quadratic term; must be positive.
    settings : PdhgSettings, optional
        Stopping rule and step sizes.
    shape : tuple, optional
        Grid shape; defaults to ``target.shape``.

    Returns
    -------
    PdhgResult
        The iterate (same shape as `target`), iterations performed, the final
        relative duality gap ``(primal - dual) / max(1, |primal|)`` and
        whether the gap criterion fired.
    """
    if not lam > 0:
        raise ConfigError("lam must be positive")
    settings = settings or PdhgSettings()
    target = np.asarray(target, dtype=float)
    _check_finite(target, "target")
    out_shape = target.shape
    f = target.reshape(shape) if shape is not None else target
    tau, sig = settings.steps(f.ndim)
    gamma = 1.0 / lam

    z = f.copy()
    zbar = z.copy()
    p = np.zeros((f.ndim,) + f.shape)
    gap = math.inf
    converged = False
    k = 0
    for k in range(1, settings.max_iters + 1):
        p = _project_unit_ball(p + sig * grad(zbar))
        z_new = (z + tau * div(p) + (tau / lam) * f) / (1.0 + tau / lam)
        if settings.accelerate:
            theta = 1.0 / math.sqrt(1.0 + 2.0 * gamma * tau)
            tau *= theta
            sig /= theta
        else:
            theta = 1.0
        zbar = z_new + theta * (z_new - z)
        z = z_new
        primal = _tv_primal(z, f, lam)
        gap = (primal - _tv_dual(p, f, lam)) / max(1.0, abs(primal))
        if gap < settings.gap_tol:
            converged = True
            break
    return PdhgResult(z.reshape(out_shape), k, gap, converged)


# --------------------------------------------------------------------------
# penalties
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstrainedQuadratic:
    """``1/2 |x|^2`` plus the indicator of ``{x >= 0}``."""

    @property
    def sigma(self) -> float:
        return 0.5

    def prox_conjugate(self, xi: np.ndarray) -> np.ndarray:
        return np.maximum(xi, 0.0)

    def value(self, x: np.ndarray) -> float:
        if np.any(x < 0):
            return math.inf
        return 0.5 * float(np.dot(x.ravel(), x.ravel()))


@dataclass(frozen=True)
class TVQuadratic:
    """``1/(2 lam) |x|^2 + TV(x)`` on a grid of the given shape."""

    lam: float
    shape: tuple[int, ...]
    settings: PdhgSettings = field(default_factory=PdhgSettings)

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("lam must be positive")
        if len(self.shape) not in (1, 2):
            raise ConfigError("TV grid must be 1D or 2D")
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))

    @property
    def sigma(self) -> float:
        return 1.0 / (2.0 * self.lam)

    def prox_conjugate(self, xi: np.ndarray) -> np.ndarray:
        # argmin Theta(z) - <xi, z> is TV denoising of lam * xi
        res = pdhg_tv_denoise(self.lam * xi, self.lam, self.settings, self.shape)
        return res.z

    def value(self, x: np.ndarray) -> float:
        u = np.reshape(x, self.shape)
        return float(np.sum(u * u) / (2.0 * self.lam) + total_variation(u))


Penalty = Union[ConstrainedQuadratic, TVQuadratic]


def prox_conjugate(penalty: Penalty, xi) -> np.ndarray:
    """Unique minimiser of ``Theta(z) - <xi, z>``."""
    xi = np.asarray(xi, dtype=float)
    _check_finite(xi, "xi")
    return penalty.prox_conjugate(xi)


def penalty_value(penalty: Penalty, x) -> float:
    """``Theta(x)``; ``math.inf`` outside the domain."""
    x = np.asarray(x, dtype=float)
    _check_finite(x, "x")
    return penalty.value(x)


def bregman_distance(penalty: Penalty, x_bar, x, xi) -> float:
    """``Theta(x_bar) - Theta(x) - <xi, x_bar - x>`` for ``xi`` in the
    subdifferential at ``x``.  Returns ``math.inf`` if ``x_bar`` lies outside
    the domain."""
    x_bar = np.asarray(x_bar, dtype=float)
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    top = penalty.value(x_bar)
    if math.isinf(top):
        return math.inf
    return top - penalty.value(x) - float(np.dot(xi.ravel(), (x_bar - x).ravel()))
