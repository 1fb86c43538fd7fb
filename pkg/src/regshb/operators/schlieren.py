"""Schlieren tomography: squared Radon data on ``D = [-1, 1]^2``.

Block ``i`` maps an image ``f`` to ``(R_i f)^2`` sampled at detector offsets
``s`` uniform in ``[-sqrt 2, sqrt 2]``.  The domain carries the discrete
``H^1_0`` inner product ``<u, v> + <grad u, grad v>`` (unit grid weights,
zero Dirichlet boundary), so the adjoint of the derivative is

    ``L(f)^* g = (I - Lap)^{-1} (2 R_i^T (g * R_i f))``

with ``Lap`` the 5-point Dirichlet Laplacian.
"""
from __future__ import annotations

import numpy as np
from scipy import fft

from ..errors import ConfigError, InputError
from .phantom import schlieren_phantom
from .system import ForwardSystem, GroundTruth
from .tomo import ray_matrix

__all__ = ["helmholtz_solve", "dirichlet_eigenvalues", "h1_inner",
           "SchlierenSystem", "schlieren_build"]


def dirichlet_eigenvalues(n: int) -> np.ndarray:
    """Eigenvalues of the 1D negative Dirichlet Laplacian (unit spacing)."""
    k = np.arange(1, n + 1)
    return 4.0 * np.sin(k * np.pi / (2.0 * (n + 1))) ** 2


def helmholtz_solve(v: np.ndarray) -> np.ndarray:
    """Solve ``(I - Lap) u = v`` on a square grid, homogeneous Dirichlet
    boundary, by diagonalisation in the discrete sine basis."""
    v = np.asarray(v, dtype=float)
    flat = v.ndim == 1
    if flat:
        n = int(round(np.sqrt(v.size)))
        if n * n != v.size:
            raise InputError("flat input must be a square grid")
        v = v.reshape(n, n)
    ny, nx = v.shape
    lam = 1.0 + dirichlet_eigenvalues(ny)[:, None] + dirichlet_eigenvalues(nx)[None, :]
    u = fft.idstn(fft.dstn(v, type=1, norm="ortho") / lam, type=1, norm="ortho")
    return u.ravel() if flat else u


def _padded_diffs(u: np.ndarray):
    p = np.pad(u, 1)
    return np.diff(p, axis=1)[1:-1, :], np.diff(p, axis=0)[:, 1:-1]


def h1_inner(u: np.ndarray, v: np.ndarray, shape: tuple[int, int]) -> float:
    """Discrete ``H^1_0`` inner product with unit grid weights."""
    u = np.reshape(u, shape)
    v = np.reshape(v, shape)
    ux, uy = _padded_diffs(u)
    vx, vy = _padded_diffs(v)
    return float(np.sum(u * v) + np.sum(ux * vx) + np.sum(uy * vy))


class SchlierenSystem(ForwardSystem):
    """One nonlinear block per direction."""

    def __init__(self, grid_n: int, n_dirs: int, eta: float = 0.01,
                 data=None, noise_levels=None):
        if grid_n < 16:
            raise ConfigError("schlieren grid_n must be at least 16")
        if n_dirs < 1:
            raise ConfigError("need at least one direction")
        super().__init__(n_dirs, (grid_n, grid_n), eta, data, noise_levels)
        self.grid_n = grid_n
        self.thetas = np.arange(n_dirs) * (np.pi / n_dirs)
        self.offsets = np.linspace(-np.sqrt(2.0), np.sqrt(2.0), grid_n)
        self.radon = [ray_matrix([th], self.offsets, grid_n, 2.0) for th in self.thetas]
        self.radon_t = [R.T.tocsr() for R in self.radon]

    def residual_dim(self, i):
        return self.grid_n

    def apply(self, i, x):
        return self.radon[i].dot(x) ** 2

    def linearize(self, i, x, h):
        return 2.0 * self.radon[i].dot(x) * self.radon[i].dot(h)

    def adjoint(self, i, x, w):
        rf = self.radon[i].dot(x)
        return helmholtz_solve(2.0 * self.radon_t[i].dot(np.asarray(w) * rf))

    def adjoint_sum(self, idx, x, ws):
        # one Helmholtz solve for the whole batch
        acc = np.zeros(self.size)
        for i, w in zip(idx, ws):
            acc += 2.0 * self.radon_t[i].dot(np.asarray(w) * self.radon[i].dot(x))
        return helmholtz_solve(acc)


def schlieren_build(grid_n: int = 110, n_dirs: int = 60,
                    eta: float = 0.01) -> tuple[SchlierenSystem, GroundTruth]:
    """Schlieren system over the fixed piecewise-constant phantom."""
    system = SchlierenSystem(grid_n, n_dirs, eta)
    truth = GroundTruth.from_system(system, schlieren_phantom(grid_n))
    return system, truth
